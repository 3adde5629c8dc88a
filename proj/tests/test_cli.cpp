#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace
{
struct Outcome
{
    int code;
    std::string out;  //!< stdout and stderr
};

Outcome run(std::string const& args)
{
    std::string cmd = std::string("\"") + SPT_CLI + "\" " + args + " 2>&1";
    Outcome r{-1, {}};
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    while (auto n = std::fread(buf, 1, sizeof buf, pipe))
        r.out.append(buf, n);
    int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string config(char const* name)
{
    return std::string("--config \"") + SPT_CONFIG_DIR + "/" + name + "\"";
}

fs::path work(char const* name)
{
    auto dir = fs::path(SPT_WORK_DIR) / name;
    fs::remove_all(dir);
    fs::create_directories(dir.parent_path());
    return dir;
}

std::string out_flag(fs::path const& dir)
{
    return "--out \"" + dir.string() + "\"";
}

std::string slurp(fs::path const& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::vector<std::vector<std::string>> read_csv(fs::path const& p)
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(slurp(p));
    std::string line;
    while (std::getline(in, line))
    {
        std::vector<std::string> row(1);
        bool quoted = false;
        for (char ch : line)
        {
            if (ch == '"')
                quoted = !quoted;
            else if (ch == ',' && !quoted)
                row.emplace_back();
            else
                row.back() += ch;
        }
        rows.push_back(row);
    }
    return rows;
}
}  // namespace

TEST_CASE("trees commands")
{
    auto r = run("trees derive --path \"(2,1)\"");
    CHECK(r.code == 0);
    CHECK(r.out.find("6 trees") != std::string::npos);

    r = run("trees derive --path \"(2,1) (4,1)\"");
    CHECK(r.code == 0);
    CHECK(r.out.find("active nodes: {") != std::string::npos);

    r = run("trees order --path \"(2,1),(4,1)\" --gamma 0.25 --delta 0.25");
    CHECK(r.code == 0);
    CHECK(r.out.rfind("1.25\n", 0) == 0);
    CHECK(r.out.find("witness: tree") != std::string::npos);

    r = run("trees acn");
    CHECK(r.code == 0);
    CHECK(r.out == "{(2,1)}\n");

    r = run("trees render --path \"(2,1)\" --format dot");
    CHECK(r.code == 0);
    CHECK(r.out.rfind("digraph", 0) == 0);

    r = run("trees derive --path \"(1,1)\"");
    CHECK(r.code == 2);
    CHECK(r.out.find("step 1: not active") != std::string::npos);

    r = run("trees order --path \"(2,1) (9,9)\"");
    CHECK(r.code == 2);
    CHECK(r.out.find("step 2") != std::string::npos);
}

TEST_CASE("argument errors exit 1")
{
    CHECK(run("").code == 1);
    CHECK(run("bogus").code == 1);
    CHECK(run("simulate").code == 1);
    CHECK(run("trees render --format png").code == 1);
    CHECK(run("converge --config x.json --threads 0").code == 1);
    CHECK(run("--help").code == 0);
}

TEST_CASE("simulate is reproducible and echoes its config")
{
    auto a = work("sim_a"), b = work("sim_b");
    auto ra = run("simulate " + config("simulate_tanh.json") + " " + out_flag(a));
    auto rb = run("simulate " + config("simulate_tanh.json") + " " + out_flag(b) + " --threads 3");
    REQUIRE(ra.code == 0);
    REQUIRE(rb.code == 0);
    CHECK(ra.out.find("seed 21") != std::string::npos);
    for (auto name : {"trajectory_exp_euler.csv", "trajectory_taylor_w3.csv",
                      "trajectory_implicit_euler.csv"})
    {
        CAPTURE(name);
        REQUIRE(fs::exists(a / name));
        CHECK(slurp(a / name) == slurp(b / name));
    }
    auto echoed = slurp(a / "effective_config.json");
    CHECK(echoed.find("\"seed\": 21") != std::string::npos);
    CHECK(echoed.find(a.string()) != std::string::npos);

    auto rows = read_csv(a / "trajectory_exp_euler.csv");
    REQUIRE(rows.size() == 18);
    CHECK(rows[0][0] == "step");
    CHECK(rows[0].size() == 3 + 8);

    auto c = work("sim_seed");
    REQUIRE(run("simulate " + config("simulate_tanh.json") + " " + out_flag(c) + " --seed 22").code == 0);
    CHECK(slurp(c / "trajectory_exp_euler.csv") != slurp(a / "trajectory_exp_euler.csv"));
    CHECK(slurp(c / "effective_config.json").find("\"seed\": 22") != std::string::npos);
}

TEST_CASE("zero noise and zero nonlinearity decay exactly")
{
    auto dir = work("sim_decay");
    REQUIRE(run("simulate " + config("simulate_decay.json") + " " + out_flag(dir)).code == 0);
    for (auto name : {"exp_euler", "taylor_w2", "taylor_w3", "rk"})
    {
        CAPTURE(name);
        auto rows = read_csv(dir / ("trajectory_" + std::string(name) + ".csv"));
        REQUIRE(rows.size() == 12);
        for (std::size_t s = 1; s < rows.size(); ++s)
        {
            double t = std::stod(rows[s][1]);
            for (std::size_t k = 1; k <= 4; ++k)
            {
                double lambda = std::numbers::pi * std::numbers::pi * double(k * k);
                double c0 = std::stod(rows[1][2 + k]);
                double expect = std::exp(-lambda * t) * c0;
                double got = std::stod(rows[s][2 + k]);
                CHECK(std::fabs(got - expect) <= 1e-12 * std::max(1.0, std::fabs(c0)));
            }
        }
    }
}

TEST_CASE("simulate failures leave no output")
{
    auto dir = work("sim_fail");
    auto r = run("simulate --config \"" + (fs::path(SPT_WORK_DIR) / "missing.json").string() + "\" "
                 + out_flag(dir));
    CHECK(r.code == 1);
    CHECK(r.out.find("missing.json") != std::string::npos);
    CHECK(!fs::exists(dir));

    r = run("simulate " + config("simulate_w3_without_integrals.json") + " " + out_flag(dir));
    CHECK(r.code == 1);
    CHECK(r.out.find("time-integral") != std::string::npos);
    CHECK(!fs::exists(dir));

    r = run("simulate " + config("unknown_key.json") + " " + out_flag(dir));
    CHECK(r.code == 1);
    CHECK(r.out.find("sead") != std::string::npos);
    CHECK(!fs::exists(dir));
}

TEST_CASE("converge writes reports and the identity check")
{
    auto a = work("conv_a"), b = work("conv_b");
    auto ra = run("converge " + config("converge_small.json") + " " + out_flag(a) + " --identity-check");
    REQUIRE(ra.code == 0);
    auto rb = run("converge " + config("converge_small.json") + " " + out_flag(b) + " --threads 4");
    REQUIRE(rb.code == 0);
    for (auto name : {"local_exp_euler", "local_taylor_w3", "local_implicit_euler"})
    {
        CAPTURE(name);
        auto csv = fs::path(name).concat(".csv");
        REQUIRE(fs::exists(a / csv));
        CHECK(fs::exists(a / fs::path(name).concat(".svg")));
        CHECK(slurp(a / csv) == slurp(b / csv));
        auto rows = read_csv(a / csv);
        REQUIRE(rows.size() == 5);
        CHECK(rows[0] == std::vector<std::string>{"level", "M", "h", "error", "stderr", "paths", "seed"});
        CHECK(rows[1][6] == "17");
    }
    auto summary = slurp(a / "summary.txt");
    CHECK(summary.find("identical increments") != std::string::npos);
    CHECK(summary.find("seed: 17") != std::string::npos);
    CHECK(summary.find("config hash: ") != std::string::npos);
    CHECK(summary.find("identity check") != std::string::npos);
    CHECK(slurp(b / "summary.txt").find("identity check") == std::string::npos);

    auto id = read_csv(a / "identity_check.txt");
    REQUIRE(id.size() == 6);
    CHECK(id[1] == std::vector<std::string>{"wood", "node", "substeps", "residual", "quadrature_bound",
                                            "delta_u_norm"});
    for (std::size_t i = 2; i < id.size(); ++i)
    {
        double residual = std::stod(id[i][3]), bound = std::stod(id[i][4]), du = std::stod(id[i][5]);
        CHECK(residual >= 0);
        CHECK(bound > 0);
        CHECK(du > 0);
    }
    CHECK(id[2][0] == "w0");
    CHECK(id[4][0] == "(2,1)");
    // same path at both resolutions
    CHECK(std::stod(id[3][3]) < std::stod(id[2][3]));
    CHECK(std::fabs(std::stod(id[3][5]) - std::stod(id[2][5])) < 1e-2 * std::stod(id[3][5]));

    // threads and out dir do not enter the hash
    auto hash_line = [](std::string const& s) { return s.substr(s.find("config hash: "), 77); };
    CHECK(hash_line(summary) == hash_line(slurp(b / "summary.txt")));
}

TEST_CASE("converge error codes")
{
    auto dir = work("conv_fail");
    auto r = run("converge " + config("converge_short_ladder.json") + " " + out_flag(dir));
    CHECK(r.code == 1);
    CHECK(r.out.find("at least 3") != std::string::npos);
    CHECK(!fs::exists(dir));

    r = run("converge " + config("converge_assert_fails.json") + " " + out_flag(dir));
    CHECK(r.code == 0);
    r = run("converge " + config("converge_assert_fails.json") + " " + out_flag(dir) + " --assert");
    CHECK(r.code == 3);
    CHECK(r.out.find("acceptance checks failed") != std::string::npos);
    CHECK(fs::exists(dir / "local_exp_euler.csv"));
    CHECK(fs::exists(dir / "summary.txt"));
    CHECK(!fs::exists(dir / "local_exp_euler.svg"));
}
