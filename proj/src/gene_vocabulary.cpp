#include "llm4grn/gene_vocabulary.hpp"

namespace llm4grn {

GeneVocabulary::GeneVocabulary(const std::vector<std::string>& symbols) {
    symbols_.reserve(symbols.size());
    index_.reserve(symbols.size());
    for (const auto& raw : symbols) {
        std::string sym = normalize_symbol(raw);
        if (sym.empty()) throw ParseError("empty gene symbol");
        auto [it, inserted] = index_.emplace(sym, symbols_.size());
        if (!inserted) throw DuplicateGeneError("duplicate gene symbol: " + sym);
        symbols_.push_back(std::move(sym));
    }
}

bool GeneVocabulary::contains(std::string_view symbol) const {
    return index_.find(normalize_symbol(symbol)) != index_.end();
}

std::size_t GeneVocabulary::index_of(std::string_view symbol) const {
    auto it = index_.find(normalize_symbol(symbol));
    if (it == index_.end())
        throw UnknownSymbolError("unknown gene symbol: " + std::string(symbol));
    return it->second;
}

std::uint64_t GeneVocabulary::digest() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const auto& s : symbols_) {
        h = fnv1a64(s, h);
        h = fnv1a64("\n", h);
    }
    return h;
}

}  // namespace llm4grn
