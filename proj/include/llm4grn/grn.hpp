#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "llm4grn/common.hpp"
#include "llm4grn/gene_vocabulary.hpp"

namespace llm4grn {

class WrongArityError : public Error {
public:
    using Error::Error;
};

class DuplicateEdgeError : public Error {
public:
    using Error::Error;
};

class SideViolationError : public Error {
public:
    using Error::Error;
};

class TooFewTfsError : public Error {
public:
    using Error::Error;
};

class PartitionMismatchError : public Error {
public:
    using Error::Error;
};

// Disjoint split of a gene set into transcription factors and targets.
// Both sides kept sorted; symbols are normalized on construction.
class TfPartition {
public:
    TfPartition() = default;
    TfPartition(std::vector<std::string> tfs, std::vector<std::string> targets);

    // tfs taken from `tf_symbols` (must all be vocabulary members);
    // targets = remaining vocabulary symbols.
    static TfPartition from_tf_list(const GeneVocabulary& vocab,
                                    const std::vector<std::string>& tf_symbols);

    const std::vector<std::string>& tfs() const { return tfs_; }
    const std::vector<std::string>& targets() const { return targets_; }

    bool is_tf(std::string_view symbol) const;
    bool is_target(std::string_view symbol) const;

    bool operator==(const TfPartition& other) const {
        return tfs_ == other.tfs_ && targets_ == other.targets_;
    }

private:
    std::vector<std::string> tfs_;      // sorted
    std::vector<std::string> targets_;  // sorted
};

using Edge = std::pair<std::string, std::string>;  // (tf, target)

// Bipartite TF -> target graph with exactly k regulators per target.
// Regulator lists are stored sorted, so serialization is canonical.
class Grn {
public:
    Grn() = default;

    const TfPartition& partition() const { return partition_; }
    int k() const { return k_; }
    const std::map<std::string, std::vector<std::string>>& regulators() const {
        return regulators_;
    }
    const std::vector<std::string>& regulators_of(const std::string& target) const;

    std::size_t edge_count() const { return regulators_.size() * static_cast<std::size_t>(k_); }

    // Edges in canonical order: targets sorted, regulators sorted within each.
    std::vector<Edge> edges() const;

    bool has_edge(const std::string& tf, const std::string& target) const;

private:
    friend Grn validate_grn(const TfPartition&, const std::vector<Edge>&, int);
    TfPartition partition_;
    int k_ = 0;
    std::map<std::string, std::vector<std::string>> regulators_;
};

// Checks all graph invariants and returns the canonical Grn.
// Throws UnknownSymbolError, SideViolationError, DuplicateEdgeError,
// WrongArityError.
Grn validate_grn(const TfPartition& partition, const std::vector<Edge>& edges, int k);

// Each target independently receives k distinct TFs drawn uniformly without
// replacement. Identical (partition, k, seed) yields identical output.
Grn random_grn(const TfPartition& partition, int k, std::uint64_t seed);

// Shared-edge fraction |Ea n Eb| / |Ea|. Requires equal partitions and k.
double overlap(const Grn& a, const Grn& b);

// |E| / (|tfs| * |targets|), equal to k / |tfs| by construction.
double density(const Grn& grn);

// Tab-separated edge list with header "TF\ttarget", plus a JSON sidecar
// at <path>.meta.json holding {"k", "tfs", "targets"}.
void write_grn(const Grn& grn, const std::filesystem::path& path);
Grn read_grn(const std::filesystem::path& path);

}  // namespace llm4grn
