#pragma once

#include <unistd.h>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "llm4grn/common.hpp"
#include "llm4grn/expression.hpp"
#include "llm4grn/grn.hpp"

namespace llm4grn::testing {

// Unique scratch directory removed on scope exit.
struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        static std::atomic<unsigned> counter{0};
        path = std::filesystem::temp_directory_path() /
               ("llm4grn-" + tag + "-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

inline std::vector<std::string> numbered_symbols(const std::string& prefix, int n) {
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        char buffer[32];
        std::snprintf(buffer, sizeof(buffer), "%s%04d", prefix.c_str(), i);
        out.emplace_back(buffer);
    }
    return out;
}

// Vocabulary of n_tfs + n_targets symbols with its TF partition.
struct PartitionFixture {
    GeneVocabulary vocab;
    TfPartition partition;
};

inline PartitionFixture make_partition(int n_tfs, int n_targets) {
    auto symbols = numbered_symbols("TF", n_tfs);
    auto targets = numbered_symbols("TGT", n_targets);
    symbols.insert(symbols.end(), targets.begin(), targets.end());
    GeneVocabulary vocab(symbols);
    TfPartition partition = TfPartition::from_tf_list(vocab, numbered_symbols("TF", n_tfs));
    return {std::move(vocab), std::move(partition)};
}

// Raw counts matrix with uniformly random entries in [0, high).
inline ExpressionMatrix random_matrix(int n_cells, int n_genes, std::uint64_t seed,
                                      double high = 10.0) {
    Rng rng(seed);
    Eigen::MatrixXd values(n_cells, n_genes);
    for (int i = 0; i < n_cells; ++i)
        for (int j = 0; j < n_genes; ++j) values(i, j) = rng.uniform(0.0, high);
    return make_matrix(std::move(values), {}, GeneVocabulary(numbered_symbols("G", n_genes)));
}

}  // namespace llm4grn::testing
