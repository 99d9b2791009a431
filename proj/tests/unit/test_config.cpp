#include <doctest.h>

#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "spurious/artifact.hpp"
#include "spurious/config.hpp"
#include "spurious/error.hpp"
#include "spurious/rng.hpp"
#include "spurious/text.hpp"

using namespace spurious;

TEST_SUITE("config") {

TEST_CASE("file values override defaults and relative paths follow the file") {
    RunConfig c;
    std::istringstream in("# comment\nseed = 42\nthreshold=0.7  # trailing\ndataset_path = data/x.tsv\n");
    parse_config(in, c, "/base");
    CHECK(c.seed == 42);
    CHECK(c.threshold == 0.7);
    CHECK(c.dataset_path == "/base/data/x.tsv");
    CHECK(c.window == 5);
}

TEST_CASE("unknown keys and bad values are usage errors") {
    RunConfig c;
    std::istringstream unknown("colour = blue\n");
    CHECK_THROWS_AS(parse_config(unknown, c, "/"), UsageError);
    std::istringstream bad("seed = -3\n");
    CHECK_THROWS_AS(parse_config(bad, c, "/"), UsageError);
    std::istringstream missing_eq("seed 3\n");
    CHECK_THROWS_AS(parse_config(missing_eq, c, "/"), UsageError);
    CHECK_THROWS_AS(apply_setting(c, "folds", "ten"), UsageError);
    CHECK_THROWS_AS(apply_setting(c, "orient_features", "maybe"), UsageError);
}

TEST_CASE("every key round-trips through get and apply") {
    RunConfig a;
    a.seed = 18446744073709551615ULL;
    a.doc_l2 = 0.1;
    a.dedup_per_sentence = true;
    RunConfig b;
    for (const auto& key : config_keys()) apply_setting(b, key, get_setting(a, key));
    CHECK(to_text(a) == to_text(b));
}

TEST_CASE("config hash tracks settings and dataset content") {
    testutil::TempDir dir;
    const auto data = dir.str("d.tsv");
    { std::ofstream(data) << "1\ta b\n-1\tc d\n"; }
    RunConfig a;
    a.dataset_path = data;
    const auto h = config_hash(a);
    CHECK(h.size() == 16);

    RunConfig b = a;
    b.out = "/elsewhere";
    b.labels = "/x.csv";
    b.strategy = "random";
    CHECK(config_hash(b) == h);

    b.threshold = 2.0;
    CHECK(config_hash(b) != h);

    RunConfig moved = a;
    const auto copy = dir.str("copy.tsv");
    std::filesystem::copy_file(data, copy);
    moved.dataset_path = copy;
    CHECK(config_hash(moved) == h);

    { std::ofstream(copy) << "1\ta b\n-1\tc e\n"; }
    CHECK(config_hash(moved) != h);
}

TEST_CASE("stamp comments round-trip") {
    const Stamp s{"0123456789abcdef", 77};
    const auto line = stamp_comment(s);
    CHECK(line == "# config_hash=0123456789abcdef seed=77");
    CHECK(parse_stamp_comment(line) == s);
    CHECK_FALSE(parse_stamp_comment("word,coef,class").has_value());
}

TEST_CASE("format_double round-trips") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) CHECK(parse_double(format_double(v), "v") == v);
    CHECK_THROWS_AS(parse_double("1.5x", "v"), DataError);
    CHECK_THROWS_AS(parse_int("", "v"), DataError);
}

TEST_CASE("rng is reproducible and in range") {
    Rng a(5), b(5);
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
    Rng r(9);
    for (int i = 0; i < 1000; ++i) {
        CHECK(r.index(7) < 7);
        const double u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    std::vector<int> v{1, 2, 3, 4, 5, 6};
    Rng s(3);
    s.shuffle(std::span(v));
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<int>{1, 2, 3, 4, 5, 6});
    CHECK(mix_seed(1, 2) != mix_seed(2, 1));
}

TEST_CASE("atomic writes replace the file") {
    testutil::TempDir dir;
    const auto p = dir.str("f.txt");
    write_file_atomic(p, "one");
    write_file_atomic(p, "two");
    CHECK(read_file(p) == "two");
    CHECK(std::distance(std::filesystem::directory_iterator(dir.path()), {}) == 1);
}

}
