#include "app.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

namespace fs = std::filesystem;
using possio::app::run;

namespace {

struct Outcome {
    int code;
    std::string out, err;
};

Outcome call(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

struct ScratchDir {
    fs::path path = fs::temp_directory_path() / ("possio_cli_" + std::to_string(::getpid()));
    ScratchDir() {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~ScratchDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

fs::path scratch() {
    static const ScratchDir dir;
    return dir.path;
}

fs::path write_config(const std::string& name, const std::string& text) {
    const fs::path p = scratch() / name;
    std::ofstream(p) << text;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::size_t data_rows(const fs::path& p) {
    std::ifstream is(p);
    std::string line;
    std::size_t n = 0;
    while (std::getline(is, line)) ++n;
    return n == 0 ? 0 : n - 1;
}

const char* kHarmonic = R"(flow: {a: 340.0, M: 0.5}
grid: {n: 16}
downwash: {mode: harmonic, k: 0.5}
loads: {t: [0.0, 1.0]}
field: {x: [-2.0, 0.0, 2.0], y: [0.5], t: [0.0, 1.0], tangency_x: [0.0], tangency_y: [0.05, 0.025, 0.0125]}
scan: {n_sigma: 2, n_nu: 5, nu_max: 2.0}
)";

std::string outdir(const std::string& name) { return (scratch() / name).string(); }

}  // namespace

TEST_CASE("missing config file exits with the config code") {
    const auto r = call({"solve", "-c", (scratch() / "absent.yaml").string()});
    CHECK(r.code == possio::app::kExitConfig);
    const auto e = nlohmann::json::parse(r.err);
    CHECK(e["category"] == "config");
}

TEST_CASE("malformed overrides and values are config errors") {
    const auto cfg = write_config("h1.yaml", kHarmonic);
    CHECK(call({"solve", "-c", cfg.string(), "--grid.n", "abc"}).code == possio::app::kExitConfig);
    CHECK(call({"solve", "-c", cfg.string(), "--flow.M", "1.5"}).code == possio::app::kExitConfig);
    CHECK(call({"solve", "-c", cfg.string(), "--nosuch.key", "1"}).code == possio::app::kExitConfig);
    CHECK(call({"solve", "-c", cfg.string(), "--s", "1;2"}).code == possio::app::kExitConfig);
    CHECK(call({"solve", "-c", cfg.string(), "--grid.n"}).code == possio::app::kExitConfig);
    CHECK(call({}).code == possio::app::kExitConfig);
}

TEST_CASE("unknown verify suite exits 2; hilbert suite passes") {
    CHECK(call({"verify", "nosuch"}).code == possio::app::kExitConfig);
    const auto r = call({"verify", "hilbert", "--output.dir", outdir("verify")});
    CHECK(r.code == possio::app::kExitOk);
    CHECK(data_rows(scratch() / "verify" / "verify.csv") == 4);
    CHECK(r.out.find("T_of_Tinv_random_degree64") != std::string::npos);
}

TEST_CASE("harmonic solve writes artifacts and passes every manifest gate") {
    const auto cfg = write_config("h2.yaml", kHarmonic);
    const auto r = call({"solve", "-c", cfg.string(), "--output.dir", outdir("solve")});
    REQUIRE(r.code == possio::app::kExitOk);
    const fs::path d = scratch() / "solve";
    CHECK(data_rows(d / "p_density.csv") == 16);
    CHECK(data_rows(d / "solutions.csv") == 1);
    CHECK(data_rows(d / "loads.csv") == 2);
    const auto m = nlohmann::json::parse(slurp(d / "manifest.json"));
    CHECK(m["status"] == "pass");
    CHECK(m["gates"].size() >= 5);
    for (const auto& g : m["gates"]) CHECK(g["status"] == "pass");
    CHECK(m["tolerances"].contains("hook_tolerance"));
    CHECK(m["tolerances"].contains("bromwich_gate"));
}

TEST_CASE("single-point solve reports the p density at that s") {
    const auto cfg = write_config("h3.yaml", kHarmonic);
    const auto r = call({"solve", "-c", cfg.string(), "--s", "0.5,2", "--output.dir", outdir("single")});
    REQUIRE(r.code == possio::app::kExitOk);
    const std::string csv = slurp(scratch() / "single" / "p_density.csv");
    CHECK(csv.rfind("s_re,s_im,xi,re_p,im_p", 0) == 0);
    CHECK(csv.find("\n5.0000000000000000e-01,2.0000000000000000e+00,") != std::string::npos);
}

TEST_CASE("a flagged characteristic value exits 3 and reports s") {
    const auto cfg = write_config("h4.yaml", kHarmonic);
    const auto r = call({"solve", "-c", cfg.string(), "--fredholm.char_threshold", "10", "--output.dir", outdir("cv")});
    CHECK(r.code == possio::app::kExitCharacteristic);
    const auto e = nlohmann::json::parse(r.err);
    CHECK(e["category"] == "characteristic-value");
    CHECK(e["s"][0].get<double>() == doctest::Approx(0.1));
    CHECK(e["s"][1].get<double>() == doctest::Approx(0.5));
}

TEST_CASE("scan shape: full strip and degenerate strip") {
    const auto cfg = write_config("h5.yaml", kHarmonic);
    REQUIRE(call({"scan", "-c", cfg.string(), "--output.dir", outdir("scan")}).code == possio::app::kExitOk);
    CHECK(data_rows(scratch() / "scan" / "scan.csv") == 2 * 5);
    REQUIRE(call({"scan", "-c", cfg.string(), "--scan.sigma_lo", "0.5", "--scan.sigma_hi", "0.5", "--output.dir",
                  outdir("scan1")})
                .code == possio::app::kExitOk);
    CHECK(data_rows(scratch() / "scan1" / "scan.csv") == 5);
    CHECK(fs::exists(scratch() / "scan1" / "zeros.csv"));
    CHECK(call({"scan", "-c", cfg.string(), "--scan.sigma_lo", "5.0", "--scan.sigma_hi", "6.0"}).code ==
          possio::app::kExitConfig);
}

TEST_CASE("repeated solve and scan runs are byte-identical") {
    const auto cfg = write_config("h6.yaml", kHarmonic);
    for (const char* cmd : {"solve", "scan"}) {
        const std::string a = outdir(std::string("det_a_") + cmd), b = outdir(std::string("det_b_") + cmd);
        REQUIRE(call({cmd, "-c", cfg.string(), "--output.dir", a}).code == possio::app::kExitOk);
        REQUIRE(call({cmd, "-c", cfg.string(), "--output.dir", b}).code == possio::app::kExitOk);
        for (const auto& e : fs::directory_iterator(a)) {
            if (e.path().extension() != ".csv") continue;
            CAPTURE(e.path().filename().string());
            CHECK(slurp(e.path()) == slurp(fs::path(b) / e.path().filename()));
        }
    }
}

TEST_CASE("field, loads and dump-kernel emit their tables") {
    const auto cfg = write_config("h7.yaml", kHarmonic);
    REQUIRE(call({"field", "-c", cfg.string(), "--output.dir", outdir("field")}).code == possio::app::kExitOk);
    CHECK(data_rows(scratch() / "field" / "field.csv") == 3 * 1 * 2);
    CHECK(data_rows(scratch() / "field" / "tangency.csv") == 2);
    CHECK(slurp(scratch() / "field" / "field.csv").rfind("x,y,t,re_phi,im_phi,re_psi,im_psi\n", 0) == 0);
    CHECK(call({"field", "-c", cfg.string(), "--field.y", "0", "--field.x", "0.5"}).code ==
          possio::app::kExitConfig);
    REQUIRE(call({"loads", "-c", cfg.string(), "--output.dir", outdir("loads")}).code == possio::app::kExitOk);
    CHECK(data_rows(scratch() / "loads" / "loads.csv") == 2);
    REQUIRE(call({"dump-kernel", "-c", cfg.string(), "--dump_kernel.x", "[0.1, 0.2]", "--dump_kernel.xi", "[0.1, 0.5]",
                  "--output.dir", outdir("kernel")})
                .code == possio::app::kExitOk);
    CHECK(data_rows(scratch() / "kernel" / "kernel.csv") == 3);
}

TEST_CASE("contour solve of real data, ungated, and the gate failure exit") {
    const auto cfg = write_config("c1.yaml", R"(flow: {a: 340.0, M: 0.5}
grid: {n: 16}
downwash: {mode: closure, name: decaying-exponential, rate: 1.0}
contour: {nu_max: 2.0, d_nu: 0.5, enforce_gate: false}
loads: {t: [1.0]}
)");
    const auto r = call({"solve", "-c", cfg.string(), "--output.dir", outdir("contour")});
    CHECK(r.code == possio::app::kExitConvergence);  // artifacts written, Bromwich gate recorded as failing
    const auto m = nlohmann::json::parse(slurp(scratch() / "contour" / "manifest.json"));
    CHECK(m["mode"] == "contour");
    CHECK(m["status"] == "fail");
    CHECK(data_rows(scratch() / "contour" / "solutions.csv") == 9);
    const auto g = call({"loads", "-c", cfg.string(), "--contour.enforce_gate", "true", "--output.dir", outdir("gated")});
    CHECK(g.code == possio::app::kExitConvergence);
    CHECK(nlohmann::json::parse(g.err)["category"] == "convergence");
}

TEST_CASE("time-sample downwash with a missing file is a config error") {
    const auto cfg = write_config("t1.yaml", R"(flow: {a: 340.0, M: 0.5}
downwash: {mode: time_samples, file: nowhere.csv}
)");
    CHECK(call({"solve", "-c", cfg.string()}).code == possio::app::kExitConfig);
}

TEST_CASE("output directory environment override") {
    const auto cfg = write_config("h8.yaml", kHarmonic);
    const std::string dir = outdir("from_env");
    ::setenv("POSSIO_OUTPUT_DIR", dir.c_str(), 1);
    const auto r = call({"dump-kernel", "-c", cfg.string(), "--dump_kernel.x", "0.3", "--dump_kernel.xi", "0.1"});
    ::unsetenv("POSSIO_OUTPUT_DIR");
    CHECK(r.code == possio::app::kExitOk);
    CHECK(fs::exists(fs::path(dir) / "kernel.csv"));
}
