#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <fstream>

#include "helpers.hpp"
#include "llm4grn/grn.hpp"

using namespace llm4grn;
using llm4grn::testing::TempDir;
using llm4grn::testing::make_partition;
using llm4grn::testing::numbered_symbols;

TEST_CASE("vocabulary normalizes, indexes, and rejects duplicates") {
    GeneVocabulary vocab({" sox2", "Pou5F1\t", "NANOG"});
    CHECK(vocab.size() == 3);
    CHECK(vocab.symbol(0) == "SOX2");
    CHECK(vocab.symbol(1) == "POU5F1");
    CHECK(vocab.contains("sox2"));
    CHECK(vocab.index_of("nanog") == 2);
    CHECK_THROWS_AS((void)vocab.index_of("MYC"), UnknownSymbolError);
    CHECK_THROWS_AS(GeneVocabulary({"SOX2", "sox2"}), DuplicateGeneError);
}

TEST_CASE("vocabulary digest tracks content and order") {
    GeneVocabulary a({"A", "B", "C"});
    GeneVocabulary b({"A", "B", "C"});
    GeneVocabulary reordered({"C", "B", "A"});
    GeneVocabulary different({"A", "B", "D"});
    CHECK(a.digest() == b.digest());
    CHECK(a.digest() != reordered.digest());
    CHECK(a.digest() != different.digest());
}

TEST_CASE("partition splits the vocabulary disjointly") {
    auto fx = make_partition(3, 5);
    CHECK(fx.partition.tfs().size() == 3);
    CHECK(fx.partition.targets().size() == 5);
    CHECK(std::is_sorted(fx.partition.tfs().begin(), fx.partition.tfs().end()));
    CHECK(std::is_sorted(fx.partition.targets().begin(), fx.partition.targets().end()));
    for (const auto& tf : fx.partition.tfs()) {
        CHECK(fx.partition.is_tf(tf));
        CHECK_FALSE(fx.partition.is_target(tf));
    }
    CHECK(fx.partition.tfs().size() + fx.partition.targets().size() == fx.vocab.size());
}

TEST_CASE("partition rejects unknown TFs and degenerate splits") {
    GeneVocabulary vocab({"A", "B", "C"});
    CHECK_THROWS_AS(TfPartition::from_tf_list(vocab, {"A", "Z"}), UnknownSymbolError);
    CHECK_THROWS(TfPartition::from_tf_list(vocab, {"A", "B", "C"}));  // no targets left
    CHECK_THROWS(TfPartition::from_tf_list(vocab, {}));               // no TFs
}

TEST_CASE("validate_grn enforces arity, sides, and uniqueness") {
    auto fx = make_partition(3, 2);
    const auto& tfs = fx.partition.tfs();
    const auto& targets = fx.partition.targets();

    std::vector<Edge> good;
    for (const auto& target : targets)
        for (int j = 0; j < 2; ++j) good.emplace_back(tfs[static_cast<std::size_t>(j)], target);
    const Grn grn = validate_grn(fx.partition, good, 2);
    CHECK(grn.k() == 2);
    CHECK(grn.edge_count() == 4);
    CHECK(grn.has_edge(tfs[0], targets[0]));
    CHECK_FALSE(grn.has_edge(tfs[2], targets[0]));
    CHECK(std::is_sorted(grn.regulators_of(targets[0]).begin(),
                         grn.regulators_of(targets[0]).end()));

    std::vector<Edge> short_one = good;
    short_one.pop_back();
    CHECK_THROWS_AS(validate_grn(fx.partition, short_one, 2), WrongArityError);

    std::vector<Edge> doubled = good;
    doubled[1] = doubled[0];
    CHECK_THROWS_AS(validate_grn(fx.partition, doubled, 2), DuplicateEdgeError);

    std::vector<Edge> sideways = good;
    sideways[0] = {targets[0], targets[1]};  // regulator from the target side
    CHECK_THROWS_AS(validate_grn(fx.partition, sideways, 2), SideViolationError);
}

TEST_CASE("random_grn is uniform-without-replacement per target and seeded") {
    auto fx = make_partition(6, 10);
    const Grn a = random_grn(fx.partition, 3, 42);
    const Grn b = random_grn(fx.partition, 3, 42);
    const Grn c = random_grn(fx.partition, 3, 43);
    CHECK(a.edges() == b.edges());
    CHECK(a.edges() != c.edges());

    for (const auto& target : fx.partition.targets()) {
        const auto& regs = a.regulators_of(target);
        CHECK(regs.size() == 3);
        CHECK(std::is_sorted(regs.begin(), regs.end()));
        CHECK(std::adjacent_find(regs.begin(), regs.end()) == regs.end());
        for (const auto& tf : regs) CHECK(fx.partition.is_tf(tf));
    }

    CHECK_THROWS_AS(random_grn(fx.partition, 7, 1), TooFewTfsError);
}

TEST_CASE("density equals k over the TF count") {
    auto fx = make_partition(8, 12);
    const Grn grn = random_grn(fx.partition, 2, 7);
    CHECK(density(grn) == doctest::Approx(2.0 / 8.0).epsilon(1e-12));
}

TEST_CASE("overlap is the shared-edge fraction") {
    auto fx = make_partition(4, 3);
    const auto& tfs = fx.partition.tfs();
    const auto& targets = fx.partition.targets();

    auto full_grn = [&](int first, int second) {
        std::vector<Edge> edges;
        for (const auto& t : targets) {
            edges.emplace_back(tfs[static_cast<std::size_t>(first)], t);
            edges.emplace_back(tfs[static_cast<std::size_t>(second)], t);
        }
        return validate_grn(fx.partition, edges, 2);
    };

    const Grn a = full_grn(0, 1);
    CHECK(overlap(a, a) == 1.0);
    CHECK(overlap(a, full_grn(2, 3)) == 0.0);
    CHECK(overlap(a, full_grn(1, 2)) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(overlap(a, full_grn(1, 2)) == overlap(full_grn(1, 2), a));

    auto other = make_partition(4, 4);
    CHECK_THROWS_AS((void)overlap(a, random_grn(other.partition, 2, 1)),
                    PartitionMismatchError);
    CHECK_THROWS_AS((void)overlap(a, random_grn(fx.partition, 3, 1)), PartitionMismatchError);
}

// Independent expectation for the random-overlap law: a fixed edge of one
// random graph appears in another with probability k/|tfs|, so the mean
// overlap over independent pairs converges to k/|tfs|.
TEST_CASE("mean overlap of random pairs approaches k over TF count") {
    auto fx = make_partition(10, 40);
    const int pairs = 60;
    double total = 0.0;
    for (int i = 0; i < pairs; ++i) {
        const Grn a = random_grn(fx.partition, 4, fnv1a64_mix(900, static_cast<std::uint64_t>(2 * i)));
        const Grn b =
            random_grn(fx.partition, 4, fnv1a64_mix(900, static_cast<std::uint64_t>(2 * i + 1)));
        total += overlap(a, b);
    }
    const double expectation = 4.0 / 10.0;
    // Per-pair variance is small (averaged over 40 targets); 0.03 is ~4 sigma.
    CHECK(total / pairs == doctest::Approx(expectation).epsilon(0.075));
}

TEST_CASE("grn files round trip through the canonical format") {
    TempDir dir("grn");
    auto fx = make_partition(5, 9);
    const Grn grn = random_grn(fx.partition, 2, 11);
    const auto path = dir.path / "net.tsv";
    write_grn(grn, path);
    const Grn loaded = read_grn(path);
    CHECK(loaded.k() == grn.k());
    CHECK(loaded.partition() == grn.partition());
    CHECK(loaded.edges() == grn.edges());

    // Canonical serialization: rewriting the loaded graph is byte-identical.
    const auto copy = dir.path / "net2.tsv";
    write_grn(loaded, copy);
    std::ifstream f1(path), f2(copy);
    std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(s1 == s2);
}
