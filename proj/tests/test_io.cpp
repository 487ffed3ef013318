#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "hipad/error.hpp"
#include "hipad/io.hpp"
#include "hipad/random.hpp"
#include "oracles.hpp"

using namespace hipad;
namespace fs = std::filesystem;

namespace {

DataMatrix parse(const std::string& text, const LibsvmReadOptions& options = {})
{
    std::istringstream in(text);
    return parse_libsvm(in, options);
}

std::string to_text(const DataMatrix& d)
{
    std::ostringstream out;
    write_libsvm(out, d);
    return out.str();
}

/// Line number of the ParseError thrown by `f`, or 0 if none was thrown.
template <class F>
std::size_t error_line(F&& f)
{
    try {
        f();
    } catch (const ParseError& e) {
        return e.line() == 0 ? std::size_t(-1) : e.line();
    }
    return 0;
}

struct TempDir {
    fs::path path;
    TempDir()
    {
        path = fs::temp_directory_path() / ("hipad_io_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST_CASE("doubles round-trip through text")
{
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
        const double v = rng.normal() * std::pow(10.0, rng.uniform(-30.0, 30.0));
        CHECK(parse_double(format_double(v)) == v);
    }
    CHECK(format_double(0.1) == "0.1");
    CHECK(parse_double("+2.5") == 2.5);
    CHECK_THROWS_AS(parse_double("1.5x"), ParseError);
    CHECK_THROWS_AS(parse_double(""), ParseError);
}

TEST_CASE("libsvm line grammar")
{
    const DataMatrix d = parse("+1 1:0.5 3:2\n");
    REQUIRE(d.samples() == 1);
    CHECK(d.features() == 3);
    CHECK(d.y()[0] == 1.0);
    const auto idx = d.x().row_indices(0);
    const auto val = d.x().row_values(0);
    REQUIRE(idx.size() == 2);
    CHECK(idx[0] == 0);
    CHECK(val[0] == 0.5);
    CHECK(idx[1] == 2);
    CHECK(val[1] == 2.0);
}

TEST_CASE("libsvm labels, comments and explicit feature counts")
{
    const DataMatrix d = parse("# header\n1 2:1\n\n0 1:-1\n-1\n", LibsvmReadOptions{5, std::nullopt});
    CHECK(d.samples() == 3);
    CHECK(d.features() == 5);
    CHECK(Vector(d.y().begin(), d.y().end()) == Vector{1.0, -1.0, -1.0});

    const DataMatrix u = parse("1:1 4:2\n2:3\n");
    CHECK(u.y().empty());
    CHECK(u.features() == 4);
}

TEST_CASE("libsvm rejects malformed input")
{
    CHECK_THROWS_AS(parse(""), ParseError);
    CHECK_THROWS_AS(parse("# only a comment\n"), ParseError);
    CHECK(error_line([] { parse("+1 1:1\n+1 3:1 2:1\n"); }) == 2);
    CHECK(error_line([] { parse("+1 1:1\n2 1:1\n"); }) == 2);
    CHECK(error_line([] { parse("+1 0:1\n"); }) == 1);
    CHECK(error_line([] { parse("+1 1:abc\n"); }) == 1);
    CHECK(error_line([] { parse("+1 1:1\n-1 1\n"); }) == 2);
    CHECK(error_line([] { parse("+1 1:1 9:1\n", LibsvmReadOptions{3, std::nullopt}); }) == 1);
    CHECK(error_line([] { parse("+1 1:1\n2:1\n"); }) == 2);
}

TEST_CASE("libsvm round trip is exact")
{
    Rng rng(2);
    for (int trial = 0; trial < 5; ++trial) {
        const DataMatrix d = oracle::random_data(rng, 40, 25, 0.5);
        const DataMatrix back = parse(to_text(d), LibsvmReadOptions{25, std::nullopt});
        CHECK(back == d);
    }

    TempDir dir;
    const DataMatrix d = oracle::random_data(rng, 10, 6, 1.0);
    write_libsvm(dir.path / "d.libsvm", d);
    CHECK(read_libsvm(dir.path / "d.libsvm", LibsvmReadOptions{6, std::nullopt}) == d);
    CHECK_THROWS_AS(read_libsvm(dir.path / "missing.libsvm"), IoError);
}

TEST_CASE("knowledge format")
{
    std::istringstream empty("5 0 0\n");
    const KnowledgeSet e = parse_knowledge(empty);
    CHECK(e.is_empty());
    CHECK(e.features() == 5);

    std::istringstream bad("3 1 0\n0:1 3:1 -4\n");
    CHECK(error_line([&] { parse_knowledge(bad); }) == 2);

    std::istringstream short_rows("3 2 0\n0:1 -4\n");
    CHECK_THROWS_AS(parse_knowledge(short_rows), ParseError);

    std::istringstream extra("3 1 0\n0:1 -4\n1:1 2\n");
    CHECK_THROWS_AS(parse_knowledge(extra), ParseError);

    SyntheticSpec spec;
    spec.n_train = 4;
    spec.n_test = 4;
    spec.m = 400;
    const KnowledgeSet k = generate_knowledge_synthetic(spec).knowledge;
    std::ostringstream out;
    write_knowledge(out, k);
    std::istringstream in(out.str());
    CHECK(parse_knowledge(in) == k);
}

TEST_CASE("model format")
{
    SvmModel m;
    m.support = {0};
    m.weights = {1.5};
    m.bias = -0.25;
    std::ostringstream out;
    write_model(out, m);
    CHECK(out.str() == "-0.25\n0:1.5\n");
    std::istringstream in(out.str());
    const SvmModel back = parse_model(in);
    CHECK(back.support == m.support);
    CHECK(back.weights == m.weights);
    CHECK(back.bias == m.bias);

    SvmModel empty;
    empty.bias = 3.0;
    std::ostringstream eo;
    write_model(eo, empty);
    std::istringstream ei(eo.str());
    const SvmModel eb = parse_model(ei);
    CHECK(eb.support.empty());
    CHECK(eb.bias == 3.0);

    std::istringstream blank("0.5\n\n1:2\n");
    CHECK(error_line([&] { parse_model(blank); }) == 2);
    std::istringstream unordered("0.5\n3:1\n1:2\n");
    CHECK(error_line([&] { parse_model(unordered); }) == 3);
    std::istringstream none("");
    CHECK_THROWS_AS(parse_model(none), ParseError);
}

TEST_CASE("large model reloads with identical predictions")
{
    Rng rng(3);
    Vector w(10000, 0.0);
    for (double& v : w) {
        if (rng.uniform() < 0.3) v = rng.normal();
    }
    const SvmModel m = model_from_dense(w, rng.normal(), ModelOrigin::hipad);
    TempDir dir;
    write_model(dir.path / "m.txt", m);
    const SvmModel back = read_model(dir.path / "m.txt");
    CHECK(back.support == m.support);
    CHECK(back.weights == m.weights);
    CHECK(back.bias == m.bias);

    const DataMatrix x = oracle::random_data(rng, 50, 10000, 0.05);
    for (std::size_t i = 0; i < 50; ++i) CHECK(m.decision(x.x(), i) == back.decision(x.x(), i));
}

TEST_CASE("key-value records and tables")
{
    KeyValues kv;
    kv.set("accuracy", 97.25);
    kv.set_int("support_size", 200);
    kv.set("origin", "hipad-enk");
    CHECK_THROWS_AS(kv.set("bad=key", "x"), InvalidArgument);

    std::ostringstream out;
    write_key_values(out, kv);
    std::istringstream in(out.str());
    const KeyValues back = parse_key_values(in);
    CHECK(back == kv);
    CHECK(back.get_double("accuracy") == 97.25);
    CHECK(back.get_int("support_size") == 200);
    CHECK_THROWS_AS(back.get("nope"), InvalidArgument);
    CHECK_THROWS_AS(back.get_int("origin"), ParseError);

    std::istringstream dup("a=1\na=2\n");
    CHECK(error_line([&] { parse_key_values(dup); }) == 2);

    KeyValues row2;
    row2.set("accuracy", 50.0);
    row2.set_int("support_size", 3);
    row2.set("origin", "hipad");
    std::ostringstream table;
    write_table(table, {kv, row2});
    std::istringstream tin(table.str());
    const auto rows = parse_table(tin);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == kv);
    CHECK(rows[1] == row2);
}

TEST_CASE("generator metadata round-trips")
{
    SyntheticSpec s = SyntheticSpec::ksvm_s_50k(std::uint64_t(-1));
    s.train_blocks = {true, false, true, false};
    s.correlation = 0.7;
    const SyntheticSpec back = synthetic_spec_from_metadata(synthetic_metadata(s));
    CHECK(back.n_train == s.n_train);
    CHECK(back.n_test == s.n_test);
    CHECK(back.m == s.m);
    CHECK(back.block_length == s.block_length);
    CHECK(back.block_means == s.block_means);
    CHECK(back.correlation == s.correlation);
    CHECK(back.noise_min == s.noise_min);
    CHECK(back.noise_max == s.noise_max);
    CHECK(back.seed == s.seed);
    CHECK(back.train_blocks == s.train_blocks);
    CHECK(back.test_blocks == s.test_blocks);
}

TEST_CASE("atomic writes replace the target")
{
    TempDir dir;
    const fs::path p = dir.path / "out.txt";
    write_file_atomic(p, "first\n");
    write_file_atomic(p, "second\n");
    std::ifstream in(p);
    std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(s == "second\n");
    CHECK_THROWS_AS(write_file_atomic(dir.path / "no" / "such" / "dir.txt", "x"), IoError);
    std::size_t files = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir.path)) ++files;
    CHECK(files == 1);
}
