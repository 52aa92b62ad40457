#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "llm4grn/common.hpp"

namespace llm4grn {

class DuplicateGeneError : public Error {
public:
    using Error::Error;
};

class UnknownSymbolError : public Error {
public:
    using Error::Error;
};

// Ordered set of normalized gene symbols; defines all column indices.
class GeneVocabulary {
public:
    GeneVocabulary() = default;

    // Symbols are normalized (trim + uppercase); duplicates after
    // normalization are rejected.
    explicit GeneVocabulary(const std::vector<std::string>& symbols);

    std::size_t size() const { return symbols_.size(); }
    bool empty() const { return symbols_.empty(); }

    const std::vector<std::string>& symbols() const { return symbols_; }
    const std::string& symbol(std::size_t i) const { return symbols_.at(i); }

    bool contains(std::string_view symbol) const;

    // Throws UnknownSymbolError for symbols outside the vocabulary.
    std::size_t index_of(std::string_view symbol) const;

    bool operator==(const GeneVocabulary& other) const { return symbols_ == other.symbols_; }

    // Order-sensitive content digest, used for manifest compatibility checks.
    std::uint64_t digest() const;

private:
    std::vector<std::string> symbols_;
    std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace llm4grn
