#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "ncricci/json_io.hpp"

namespace fs = std::filesystem;
using namespace ncricci;

namespace {

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("ncricci_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

int run_cli(const std::string& args) {
    std::string cmd = std::string(NCRICCI_CLI) + " " + args + " > /dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write_json(const fs::path& p, const json& j) { std::ofstream(p) << j.dump(2); }

json read_json(const fs::path& p) {
    std::ifstream in(p);
    return json::parse(in);
}

json small_config(const fs::path& out) {
    return {{"theta", 0.37},
            {"dilaton", json::array({{{"m", 1}, {"n", 0}, {"re", 0.2}}, {{"m", -1}, {"n", 0}, {"re", 0.2}}})},
            {"grid", {{"N", 6}, {"modular_N", 4}}},
            {"outputs", {{"dir", out.string()}, {"golden_dir", NCRICCI_SOURCE_DIR "/data/golden"}}}};
}

}  // namespace

TEST_CASE("config parsing fills defaults") {
    ExperimentConfig c = config_from_json(json::object());
    CHECK(c.context.theta == 0.0);
    CHECK(c.dilaton.is_zero());
    CHECK(c.grid_N == 16);
    CHECK(c.modular_N == 8);
    CHECK(c.smearing.size() == 1);
    CHECK(c.tol("spectral_rel") == 0.05);
    CHECK_THROWS_AS(c.tol("nonsense"), InputError);
}

TEST_CASE("shipped configs load") {
    for (const char* name : {"reference_nc", "theta0", "flat"}) {
        CAPTURE(name);
        ExperimentConfig c = load_config(std::string(NCRICCI_SOURCE_DIR "/configs/") + name + ".json");
        CHECK(is_self_adjoint(c.dilaton));
        CHECK_NOTHROW(c.smearing_elements());
    }
}

TEST_CASE("malformed configs are input errors") {
    json base = small_config("out");
    auto with = [&](const char* key, json v) {
        json j = base;
        j[key] = std::move(v);
        return j;
    };
    CHECK_THROWS_AS(config_from_json(with("tau", json::array({0.0, -1.0}))), InputError);
    CHECK_THROWS_AS(config_from_json(with("tau", "i")), InputError);
    CHECK_THROWS_AS(config_from_json(with("dilaton", json::array({{{"m", 1}, {"n", 0}, {"re", 0.2}}}))), InputError);
    CHECK_THROWS_AS(config_from_json(with("dilaton", 3)), InputError);
    CHECK_THROWS_AS(config_from_json(with("grid", {{"N", 0}})), InputError);
    CHECK_THROWS_AS(config_from_json(with("t_grid", json::array({0.2, 0.1}))), InputError);
    CHECK_THROWS_AS(config_from_json(with("t_grid", json::array({-0.1, 0.1}))), InputError);
    CHECK_THROWS_AS(config_from_json(with("smearing_F", "twice")), InputError);
    json skew = {{"01", json::array({{{"m", 0}, {"n", 0}, {"re", 1.0}}})}};
    CHECK_THROWS_AS(config_from_json(with("smearing_F", skew)), InputError);
    CHECK_THROWS_AS(config_from_json(with("theta", "x")), InputError);
}

TEST_CASE("config hash is deterministic and sensitive") {
    json a = small_config("out");
    json b = json::parse(a.dump());
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);
    b["grid"]["N"] = 7;
    CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("element and matrix JSON round trip") {
    AlgebraContext ctx;
    ctx.theta = 0.2;
    std::mt19937_64 rng(5);
    TorusElement a = random_element(ctx, 2, 1.0, rng);
    CHECK((element_from_json(ctx, element_to_json(a)) - a).max_abs() == 0.0);
    MatrixElement F = random_self_adjoint_matrix(ctx, 2, 1.0, rng);
    CHECK((matrix_from_json(ctx, matrix_to_json(F)) - F).max_abs() == 0.0);
}

TEST_CASE("cli: b2-report passes against the shipped golden files") {
    fs::path d = scratch("b2");
    write_json(d / "c.json", small_config(d / "out"));
    CHECK(run_cli("b2-report --config " + (d / "c.json").string()) == 0);
    json r = read_json(d / "out" / "b2_report.json");
    CHECK(r["status"] == "pass");
    CHECK(r["config_hash"].get<std::string>().size() == 16);
    CHECK(r.contains("tolerances"));
}

TEST_CASE("cli: a perturbed golden file is a tolerance failure") {
    fs::path d = scratch("golden");
    fs::path g = d / "golden";
    fs::create_directories(g);
    for (const char* f : {"b2_doubleprime.json", "b2_doubleprime_angular.json"})
        fs::copy_file(fs::path(NCRICCI_SOURCE_DIR "/data/golden") / f, g / f);
    json doc = read_json(g / "b2_doubleprime.json");
    REQUIRE(doc["terms"].size() > 1);
    doc["terms"].erase(doc["terms"].begin());
    write_json(g / "b2_doubleprime.json", doc);
    json c = small_config(d / "out");
    c["outputs"]["golden_dir"] = g.string();
    write_json(d / "c.json", c);
    CHECK(run_cli("b2-report --config " + (d / "c.json").string()) == 2);
    CHECK(read_json(d / "out" / "b2_report.json")["status"] == "fail");
}

TEST_CASE("cli: input errors exit with 3") {
    fs::path d = scratch("bad");
    std::ofstream(d / "broken.json") << "{ not json";
    CHECK(run_cli("ricci --config " + (d / "broken.json").string()) == 3);
    CHECK(run_cli("ricci --config " + (d / "missing.json").string()) == 3);
    write_json(d / "c.json", small_config(d / "out"));
    CHECK(run_cli("ricci --config " + (d / "c.json").string() + " --tol nonsense=1") == 3);
    CHECK(run_cli("ricci --config " + (d / "c.json").string() + " --tol ricci_match") == 3);
    CHECK(run_cli("frobnicate") == 3);
}

TEST_CASE("cli: ricci reports are bit-for-bit reproducible") {
    fs::path d = scratch("ricci");
    write_json(d / "c.json", small_config(d / "out"));
    REQUIRE(run_cli("ricci --config " + (d / "c.json").string() + " --out " + (d / "a").string()) == 0);
    REQUIRE(run_cli("ricci --config " + (d / "c.json").string() + " --out " + (d / "b").string() +
                    " --threads 1") == 0);
    json a = read_json(d / "a" / "ricci.json"), b = read_json(d / "b" / "ricci.json");
    CHECK(a["status"] == "pass");
    a.erase("config_hash");  // the output directory is part of the hashed document
    b.erase("config_hash");
    CHECK(a.dump() == b.dump());
}

TEST_CASE("cli: tolerance overrides can force a failure") {
    fs::path d = scratch("tol");
    write_json(d / "c.json", small_config(d / "out"));
    CHECK(run_cli("ricci --config " + (d / "c.json").string() + " --tol ricci_match=-1") == 2);
    json r = read_json(d / "out" / "ricci.json");
    CHECK(r["tolerances"]["ricci_match"] == -1.0);
}

TEST_CASE("cli: scalar and verify-identity write their outputs") {
    fs::path d = scratch("scalar");
    write_json(d / "c.json", small_config(d / "out"));
    CHECK(run_cli("scalar --config " + (d / "c.json").string()) == 0);
    CHECK(read_json(d / "out" / "scalar.json").contains("r_gamma"));
    CHECK(run_cli("verify-identity --config " + (d / "c.json").string()) == 0);
    CHECK(fs::exists(d / "out" / "identity_residual.csv"));
}

TEST_CASE("cli: spectral-check on the flat torus") {
    fs::path d = scratch("flat");
    json c = read_json(NCRICCI_SOURCE_DIR "/configs/flat.json");
    c["outputs"]["dir"] = (d / "out").string();
    write_json(d / "c.json", c);
    CHECK(run_cli("spectral-check --grid-n 6 --config " + (d / "c.json").string()) == 0);
    json r = read_json(d / "out" / "spectral.json");
    CHECK(r["status"] == "pass");
    CHECK(r["kernel_dimensions"] == json::array({1, 2}));
    CHECK(fs::exists(d / "out" / "heat_trace.csv"));
}
