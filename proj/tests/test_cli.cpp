#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "cli.hpp"
#include "kronrev/io.hpp"
#include "support/oracles.hpp"

using namespace kronrev;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "kronrev");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("kronrev_cli_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("seed ranges") {
    CHECK(cli::parse_seed_range("7") == std::vector<uint64_t>{7});
    CHECK(cli::parse_seed_range("2..4") == std::vector<uint64_t>{2, 3, 4});
    CHECK_THROWS(cli::parse_seed_range("4..2"));
    CHECK_THROWS(cli::parse_seed_range("x"));
}

TEST_CASE("exit codes") {
    CHECK(cli::exit_code_for(Error(ErrorKind::Infeasible, "")) == cli::kInfeasible);
    CHECK(cli::exit_code_for(Error(ErrorKind::SingularBlock, "")) == cli::kSingular);
    CHECK(cli::exit_code_for(Error(ErrorKind::DegenerateSystem, "")) == cli::kPipelineError);
    CHECK(run_cli({"generate", "-m", "2", "-h", "1"}).code == cli::kInfeasible);
    CHECK(run_cli({"bogus"}).code == cli::kInfeasible);
    CHECK(run_cli({"--help"}).code == cli::kOk);
}

TEST_CASE("generate is deterministic") {
    const auto a = run_cli({"generate", "-m", "6", "-h", "2", "--uniform", "--seed", "11"});
    const auto b = run_cli({"generate", "-m", "6", "-h", "2", "--uniform", "--seed", "11"});
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    const auto c = run_cli({"generate", "-m", "6", "-h", "2", "--uniform", "--seed", "12"});
    CHECK(a.out != c.out);
}

TEST_CASE("generate, reduce and identify through files") {
    const fs::path d = scratch("pipeline");
    const std::string x = (d / "net.json").string();
    REQUIRE(run_cli({"generate", "-m", "8", "-h", "3", "--uniform", "--seed", "5", "-o", x}).code == 0);
    CHECK(fs::exists(d / "net.Y.json"));

    const std::string yb = (d / "ybar.json").string();
    const auto red = run_cli({"reduce", x, "--iterative", "--emit-trace", "--emit-dot", "-o", yb});
    REQUIRE(red.code == 0);
    CHECK(fs::exists(d / "ybar.trace.json"));
    CHECK(slurp(d / "ybar.dot").find("cluster_0") != std::string::npos);
    CHECK(read_json_file((d / "ybar.trace.json").string()).size() == 3);

    // the matrix file with three trailing hidden blocks reduces to the same thing
    const auto red2 = run_cli({"reduce", (d / "net.Y.json").string(), "-h", "3"});
    REQUIRE(red2.code == 0);
    CHECK(oracle::rel(matrix_from_json(json::parse(red2.out)).dense(), matrix_from_json(read_json_file(yb)).dense()) <=
          1e-12);

    const std::string rec = (d / "rec.json").string();
    const auto id = run_cli({"identify", yb, "-o", rec, "--emit-trace", "--emit-dot"});
    REQUIRE(id.code == 0);
    CHECK(fs::exists(d / "rec.plan.json"));
    CHECK(fs::exists(d / "rec.dot"));
    CHECK(compare_up_to_hidden_relabeling(network_from_json(read_json_file(x)), network_from_json(read_json_file(rec)),
                                          1e-8));
}

TEST_CASE("identify from measurements") {
    const fs::path d = scratch("measure");
    const auto net = generate_radial(6, 2, true, 3);
    const BlockMatrix ybar = kron_reduce_network(net);
    {
        std::ofstream csv(d / "m.csv");
        write_measurements_csv(csv, simulate_measurements(ybar, 40, 0.0, 3));
    }
    const auto id = run_cli({"identify", "--from-measurements", (d / "m.csv").string()});
    REQUIRE(id.code == 0);
    CHECK(compare_up_to_hidden_relabeling(net, network_from_json(json::parse(id.out)), 1e-6));
    CHECK(run_cli({"identify", (d / "m.csv").string(), "--from-measurements", (d / "m.csv").string()}).code ==
          cli::kInfeasible);
}

TEST_CASE("bad inputs") {
    const fs::path d = scratch("bad");
    std::ofstream(d / "junk.json") << "{ not json";
    CHECK(run_cli({"reduce", (d / "junk.json").string()}).code == cli::kInfeasible);
    CHECK(run_cli({"identify", (d / "missing.json").string()}).code == cli::kInfeasible);

    // two cliques sharing an edge cannot come from a radial network
    BlockMatrix y(4);
    for (auto [a, b] : std::vector<std::pair<int, int>>{{0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 3}}) {
        y.set(a, b, -PhaseBlock::Identity());
        y.set(b, a, -PhaseBlock::Identity());
    }
    std::ofstream(d / "shared.json") << matrix_to_json(normalize_diagonal(y)).dump();
    const auto r = run_cli({"identify", (d / "shared.json").string()});
    CHECK(r.code == cli::kPipelineError);
    CHECK(r.err.find("MalformedReduction") != std::string::npos);
}

TEST_CASE("roundtrip command") {
    const auto ok = run_cli({"roundtrip", "-m", "8", "-h", "3", "--seeds", "0..99"});
    CHECK(ok.code == 0);
    CHECK(ok.out.find("100/100") != std::string::npos);
    CHECK(run_cli({"roundtrip", "-m", "5", "--hidden", "0", "--seeds", "0..9"}).code == 0);
    CHECK(run_cli({"roundtrip", "-m", "2", "-h", "1"}).code == cli::kInfeasible);
}

TEST_CASE("instances breaking the degree assumption are reported") {
    // 1 - h - 2 reduces to a single line, so the hidden node cannot come back
    const cli::InstanceFactory path = [](uint64_t seed) {
        std::mt19937_64 rng(seed);
        const PhaseBlock y = oracle::random_line(rng);
        RadialNetwork net;
        net.nodes = {{1, Role::Measured}, {2, Role::Measured}, {3, Role::Hidden}};
        net.edges = {{1, 3, y, 1.0}, {2, 3, 0.5 * y, 2.0}};
        net.y_unit = y;
        return net;
    };
    const auto rep = cli::run_round_trip(path, {0, 1, 2}, Tolerances{});
    CHECK(rep.failures == 3);
    for (const auto& o : rep.outcomes) {
        CHECK_FALSE(o.pass);
        CHECK(o.failure.find("topology mismatch") != std::string::npos);
        CHECK(o.failure.find("degree") != std::string::npos);
    }

    // a mixed batch: one bad seed fails, the rest pass
    const cli::InstanceFactory mixed = [&](uint64_t s) { return s == 3 ? path(s) : generate_radial(10, 4, true, s); };
    const auto m = cli::run_round_trip(mixed, {0, 1, 2, 3, 4}, Tolerances{}, 2);
    CHECK(m.failures == 1);
    CHECK_FALSE(m.outcomes[3].pass);
    CHECK(m.outcomes[3].seed == 3);
    CHECK(m.outcomes[4].pass);
}

TEST_CASE("installed binary") {
    const int status = std::system((std::string(KRONREV_BIN) + " generate -m 2 -h 1 > /dev/null 2>&1").c_str());
    REQUIRE(WIFEXITED(status));
    CHECK(WEXITSTATUS(status) == 2);
    const int ok = std::system((std::string(KRONREV_BIN) + " roundtrip -m 6 -h 2 --seeds 0..4 > /dev/null 2>&1").c_str());
    CHECK(WEXITSTATUS(ok) == 0);
}
