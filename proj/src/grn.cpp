#include "llm4grn/grn.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace llm4grn {

namespace {

std::vector<std::string> normalized_sorted_unique(std::vector<std::string> in,
                                                  const char* side) {
    for (auto& s : in) s = normalize_symbol(s);
    std::sort(in.begin(), in.end());
    auto dup = std::adjacent_find(in.begin(), in.end());
    if (dup != in.end())
        throw DuplicateGeneError(std::string("duplicate ") + side + " symbol: " + *dup);
    return in;
}

}  // namespace

TfPartition::TfPartition(std::vector<std::string> tfs, std::vector<std::string> targets)
    : tfs_(normalized_sorted_unique(std::move(tfs), "TF")),
      targets_(normalized_sorted_unique(std::move(targets), "target")) {
    if (tfs_.empty()) throw Error("partition has no TFs");
    if (targets_.empty()) throw Error("partition has no targets");
    std::vector<std::string> both;
    std::set_intersection(tfs_.begin(), tfs_.end(), targets_.begin(), targets_.end(),
                          std::back_inserter(both));
    if (!both.empty())
        throw SideViolationError("symbol on both sides of the partition: " + both.front());
}

TfPartition TfPartition::from_tf_list(const GeneVocabulary& vocab,
                                      const std::vector<std::string>& tf_symbols) {
    std::vector<std::string> tfs;
    for (const auto& raw : tf_symbols) {
        std::string sym = normalize_symbol(raw);
        if (!vocab.contains(sym))
            throw UnknownSymbolError("TF not in vocabulary: " + sym);
        tfs.push_back(std::move(sym));
    }
    std::sort(tfs.begin(), tfs.end());
    tfs.erase(std::unique(tfs.begin(), tfs.end()), tfs.end());
    std::vector<std::string> targets;
    for (const auto& sym : vocab.symbols())
        if (!std::binary_search(tfs.begin(), tfs.end(), sym)) targets.push_back(sym);
    return TfPartition(std::move(tfs), std::move(targets));
}

bool TfPartition::is_tf(std::string_view symbol) const {
    return std::binary_search(tfs_.begin(), tfs_.end(), std::string(symbol));
}

bool TfPartition::is_target(std::string_view symbol) const {
    return std::binary_search(targets_.begin(), targets_.end(), std::string(symbol));
}

const std::vector<std::string>& Grn::regulators_of(const std::string& target) const {
    auto it = regulators_.find(target);
    if (it == regulators_.end())
        throw UnknownSymbolError("no such target in GRN: " + target);
    return it->second;
}

std::vector<Edge> Grn::edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count());
    for (const auto& [target, tfs] : regulators_)
        for (const auto& tf : tfs) out.emplace_back(tf, target);
    return out;
}

bool Grn::has_edge(const std::string& tf, const std::string& target) const {
    auto it = regulators_.find(target);
    if (it == regulators_.end()) return false;
    return std::binary_search(it->second.begin(), it->second.end(), tf);
}

Grn validate_grn(const TfPartition& partition, const std::vector<Edge>& edges, int k) {
    if (k <= 0) throw Error("k must be positive");
    std::map<std::string, std::vector<std::string>> regulators;
    for (const auto& [tf_raw, target_raw] : edges) {
        const std::string tf = normalize_symbol(tf_raw);
        const std::string target = normalize_symbol(target_raw);
        if (!partition.is_tf(tf)) {
            if (partition.is_target(tf))
                throw SideViolationError("target used as regulator: " + tf);
            throw UnknownSymbolError("edge source not in partition: " + tf);
        }
        if (!partition.is_target(target)) {
            if (partition.is_tf(target))
                throw SideViolationError("TF used as edge target: " + target);
            throw UnknownSymbolError("edge target not in partition: " + target);
        }
        auto& list = regulators[target];
        if (std::find(list.begin(), list.end(), tf) != list.end())
            throw DuplicateEdgeError("duplicate edge " + tf + " -> " + target);
        list.push_back(tf);
    }
    for (auto& [target, list] : regulators) {
        if (static_cast<int>(list.size()) != k)
            throw WrongArityError("target " + target + " has " +
                                  std::to_string(list.size()) + " regulators, expected " +
                                  std::to_string(k));
        std::sort(list.begin(), list.end());
    }
    // Every partition target must be regulated.
    for (const auto& target : partition.targets())
        if (regulators.find(target) == regulators.end())
            throw WrongArityError("target " + target + " has 0 regulators, expected " +
                                  std::to_string(k));
    Grn g;
    g.partition_ = partition;
    g.k_ = k;
    g.regulators_ = std::move(regulators);
    return g;
}

Grn random_grn(const TfPartition& partition, int k, std::uint64_t seed) {
    const auto& tfs = partition.tfs();
    if (static_cast<int>(tfs.size()) < k)
        throw TooFewTfsError("need at least " + std::to_string(k) + " TFs, have " +
                             std::to_string(tfs.size()));
    Rng rng(seed);
    std::vector<Edge> edges;
    edges.reserve(partition.targets().size() * static_cast<std::size_t>(k));
    for (const auto& target : partition.targets()) {
        const auto picks = rng.sample_without_replacement(tfs.size(), static_cast<std::size_t>(k));
        for (std::size_t idx : picks) edges.emplace_back(tfs[idx], target);
    }
    return validate_grn(partition, edges, k);
}

double overlap(const Grn& a, const Grn& b) {
    if (!(a.partition() == b.partition()) || a.k() != b.k())
        throw PartitionMismatchError("GRNs do not share a partition and k");
    std::size_t shared = 0;
    for (const auto& [target, tfs_a] : a.regulators()) {
        const auto& tfs_b = b.regulators_of(target);
        std::vector<std::string> both;
        std::set_intersection(tfs_a.begin(), tfs_a.end(), tfs_b.begin(), tfs_b.end(),
                              std::back_inserter(both));
        shared += both.size();
    }
    return static_cast<double>(shared) / static_cast<double>(a.edge_count());
}

double density(const Grn& grn) {
    const double possible = static_cast<double>(grn.partition().tfs().size()) *
                            static_cast<double>(grn.partition().targets().size());
    return static_cast<double>(grn.edge_count()) / possible;
}

void write_grn(const Grn& grn, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path.string());
    out << "TF\ttarget\n";
    for (const auto& [tf, target] : grn.edges()) out << tf << '\t' << target << '\n';
    if (!out) throw Error("write failed: " + path.string());

    nlohmann::json meta;
    meta["k"] = grn.k();
    meta["tfs"] = grn.partition().tfs();
    meta["targets"] = grn.partition().targets();
    std::ofstream side(path.string() + ".meta.json");
    if (!side) throw Error("cannot open for writing: " + path.string() + ".meta.json");
    side << meta.dump(2) << '\n';
}

Grn read_grn(const std::filesystem::path& path) {
    std::ifstream side(path.string() + ".meta.json");
    if (!side) throw Error("missing GRN sidecar: " + path.string() + ".meta.json");
    nlohmann::json meta = nlohmann::json::parse(side, nullptr, true);
    TfPartition partition(meta.at("tfs").get<std::vector<std::string>>(),
                          meta.at("targets").get<std::vector<std::string>>());
    const int k = meta.at("k").get<int>();

    std::ifstream in(path);
    if (!in) throw Error("cannot open: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty GRN file: " + path.string());
    if (trim(line) != "TF\ttarget")
        throw ParseError("bad GRN header in " + path.string());
    std::vector<Edge> edges;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto fields = split(line, '\t');
        if (fields.size() != 2)
            throw ParseError("bad GRN edge line: '" + line + "'");
        edges.emplace_back(fields[0], fields[1]);
    }
    return validate_grn(partition, edges, k);
}

}  // namespace llm4grn
