#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "cli.hpp"
#include "epl/harness/montecarlo.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = epl::cli::dispatch(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class TempDir {
public:
    TempDir() {
        path_ = fs::temp_directory_path() / ("epl_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++));
        fs::create_directories(path_);
        std::ofstream(path_ / "small.cfg") << "n_firms = 2\nn_sizes = 2\nn_obs = 1500\nseed = 11\n";
    }
    ~TempDir() { fs::remove_all(path_); }
    fs::path operator/(const std::string& name) const { return path_ / name; }
    std::string cfg() const { return (path_ / "small.cfg").string(); }

private:
    static inline int counter_ = 0;
    fs::path path_;
};

} // namespace

TEST_CASE("usage errors exit 1, help exits 0") {
    CHECK(run({}).code == epl::cli::kExitUsage);
    const Run unknown = run({"simulate", "--out", "x.csv", "--bogus", "1"});
    CHECK(unknown.code == epl::cli::kExitUsage);
    CHECK(unknown.err.find("--bogus") != std::string::npos);
    const Run help = run({"--help"});
    CHECK(help.code == epl::cli::kExitOk);
    CHECK(help.out.find("montecarlo") != std::string::npos);
    CHECK(run({"simulate"}).code == epl::cli::kExitUsage);  // --out required
    CHECK(run({"estimate", "--data", "/nonexistent/file.csv"}).code == epl::cli::kExitUsage);
}

TEST_CASE("simulate then estimate") {
    TempDir tmp;
    const std::string data = (tmp / "d.csv").string();
    const Run sim = run({"simulate", "--config", tmp.cfg(), "--out", data, "--n-obs", "2000"});
    REQUIRE(sim.code == epl::cli::kExitOk);
    CHECK(sim.out.find("2000 observations") != std::string::npos);
    CHECK(fs::exists(data + ".meta"));

    for (const char* method : {"epl-anal", "epl-jf", "nfxp-jf"}) {
        const Run est = run({"estimate", "--data", data, "--method", method});
        CHECK(est.code == epl::cli::kExitOk);
        CHECK(est.out.find(std::string("method = ") + method) != std::string::npos);
        CHECK(est.out.find("converged = true") != std::string::npos);
        CHECK(est.out.find("theta_5 = ") != std::string::npos);
    }
    const Run k2 = run({"estimate", "--data", data, "--method", "epl-krylov", "--k", "2", "--out",
                        (tmp / "r.txt").string()});
    CHECK(k2.code == epl::cli::kExitOk);
    CHECK(slurp(tmp / "r.txt").find("iterations = 2\n") != std::string::npos);

    CHECK(run({"estimate", "--data", data, "--method", "epl-fast"}).code == epl::cli::kExitUsage);
    CHECK(run({"estimate", "--data", data, "--k", "0"}).code == epl::cli::kExitUsage);
}

TEST_CASE("montecarlo then summarize") {
    TempDir tmp;
    const std::string dir = (tmp / "mc").string();
    const Run mc = run({"montecarlo", "--config", tmp.cfg(), "--out", dir, "--reps", "2", "--method",
                        "epl-anal,epl-jf", "--k", "1,inf", "--quiet"});
    REQUIRE(mc.code == epl::cli::kExitOk);
    CHECK(fs::exists(tmp / "mc/config.txt"));
    std::ifstream in(tmp / "mc/records.csv");
    CHECK(epl::harness::read_records_csv(in).size() == 2 * 2 * 2);

    const Run sum = run({"summarize", dir});
    REQUIRE(sum.code == epl::cli::kExitOk);
    CHECK(sum.out.find("Non-Conv.") != std::string::npos);
    CHECK(fs::exists(tmp / "mc/summary.txt"));
    CHECK(slurp(tmp / "mc/summary.csv").rfind("method,k,stat,value", 0) == 0);
    CHECK(run({"summarize", (tmp / "missing").string()}).code == epl::cli::kExitUsage);
}

TEST_CASE("diagnose") {
    TempDir tmp;
    const Run d = run({"diagnose", "--config", tmp.cfg(), "--points", "2", "--out", (tmp / "diag.txt").string()});
    CHECK(d.code == epl::cli::kExitOk);
    const std::string report = slurp(tmp / "diag.txt");
    CHECK(report.find("point 0 (theta_true, equilibrium)") != std::string::npos);
    CHECK(report.find("point 1:") != std::string::npos);
    CHECK(report.find("bound holds on every column") != std::string::npos);
    CHECK(run({"diagnose", "--config", tmp.cfg(), "--points", "0"}).code == epl::cli::kExitUsage);
}
