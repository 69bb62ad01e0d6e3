#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"

using json = nlohmann::json;

namespace {

struct Run {
    int code = 0;
    json out;
    std::string text;
};

Run run(const std::vector<std::string>& args)
{
    std::ostringstream out, err;
    Run r;
    r.code = biquad::cli::run(args, out, err);
    r.text = out.str();
    if (!r.text.empty() && r.text.front() == '{') r.out = json::parse(r.text);
    return r;
}

std::string temp_path(const std::string& name)
{
    return (std::filesystem::temp_directory_path() / ("biquad_cli_" + name)).string();
}

} // namespace

TEST(Cli, AnalyzeConstructedCurve)
{
    auto r = run({"analyze", "--eb", "1,3,1"});
    ASSERT_EQ(r.code, 0) << r.text;
    EXPECT_EQ(r.out["schema"], "v1");
    EXPECT_EQ(r.out["tag"]["family"], "EB_i");
    EXPECT_EQ(r.out["parameterization"]["family"], "Bax_par");
    EXPECT_GT(r.out["parameterization"]["k"].get<double>(), 0);
    EXPECT_LE(r.out["parameterization"]["residual"].get<double>(), 1e-9);
    EXPECT_TRUE(r.out["rotation"]["rational"].get<bool>());
    EXPECT_NEAR(r.out["rotation"]["birkhoff"].get<double>(), r.out["rotation"]["value"].get<double>(), 1e-6);
    EXPECT_LE(r.out["invariants"]["residual"].get<double>(), 1e-10);

    // the same curve as a JSON file, with exact invariants
    auto path = temp_path("curve.json");
    std::ofstream(path) << R"({"a": [[1, 0, 1], [0, 6, 0], [1, 0, 1]]})";
    auto e = run({"analyze", "--exact", "--curve-json", path});
    ASSERT_EQ(e.code, 0) << e.text;
    EXPECT_TRUE(e.out["invariants"]["exact"]["equal"].get<bool>());
    EXPECT_EQ(e.out["rotation"]["n"], r.out["rotation"]["n"]);
    std::remove(path.c_str());
}

TEST(Cli, CayleyCircles)
{
    auto r = run({"cayley", "--circles", "1,2", "--N", "3"});
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(r.out["verdict"], "zero");
    EXPECT_EQ(r.out["period"], 3);
    auto q = run({"--exact", "cayley", "--circles", "1,2", "--N", "3"});
    EXPECT_EQ(q.out["det"], "0");
    auto n = run({"cayley", "--circles", "1,3", "--N", "5"});
    EXPECT_EQ(n.out["verdict"], "nonzero");
    EXPECT_TRUE(n.out["period"].is_null());
}

TEST(Cli, PonceletFilesAndPlots)
{
    auto a = temp_path("a.json"), b = temp_path("b.json"), csv = temp_path("t.csv"), svg = temp_path("t.svg");
    std::ofstream(a) << R"({"M": [[-1, 0, 0], [0, 1, 0], [0, 0, 1]]})";
    std::ofstream(b) << R"({"M": [[-2, 0, 0], [0, 1, 0], [0, 0, 1]]})";
    auto r = run({"poncelet", "--conic-a", a, "--conic-b", b, "--csv", csv, "--svg", svg});
    ASSERT_EQ(r.code, 0) << r.text;
    EXPECT_EQ(r.out["period"], 4);
    EXPECT_LE(r.out["closure"]["residual"].get<double>(), 1e-8);
    std::ifstream in(csv);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "step,Qx,Qy,Px,Py");
    std::ifstream s(svg);
    std::string first;
    std::getline(s, first);
    EXPECT_EQ(first.rfind("<svg", 0), 0u);
    for (const auto& p : {a, b, csv, svg}) std::remove(p.c_str());
}

TEST(Cli, PellAbelAndMalyshev)
{
    auto r = run({"pell-abel", "--quartic", "1,0,-2,0,2"});
    ASSERT_EQ(r.code, 0);
    EXPECT_TRUE(r.out["solvable"].get<bool>());
    EXPECT_EQ(r.out["P"], json::array({"1", "0", "-1"}));
    EXPECT_EQ(r.out["L"], "-1");
    EXPECT_EQ(r.out["gamma"][0], "0");

    auto b = run({"pell-abel", "--quartic", "1,0,1,1,3", "--max-deg", "4"});
    EXPECT_EQ(b.code, 4);
    EXPECT_FALSE(b.out["solvable"].get<bool>());

    EXPECT_EQ(run({"pell-abel", "--quartic", "1,0.5,0,0,2"}).code, 2);
    auto f = run({"pell-abel", "--quartic", "1,0.5,0,0,2", "--rationalize"});
    EXPECT_TRUE(f.out.contains("warning"));

    auto m = run({"malyshev", "--quartic", "1,0,-2,0,2", "--k", "3"});
    EXPECT_EQ(m.out["first_zero"], 1);
    EXPECT_EQ(m.out["implied_deg_P"], 2);
}

TEST(Cli, DirichletEmitsWitness)
{
    auto path = temp_path("w.json");
    auto r = run({"dirichlet", "--ellipse", "1/3", "--emit", path});
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(r.out["verdict"], "nonunique");
    std::ifstream in(path);
    json w = json::parse(in);
    EXPECT_EQ(w["schema"], "v1");
    EXPECT_EQ(w["multiplier"], 6);
    EXPECT_TRUE(w["f"].contains("num"));
    EXPECT_LE(w["residual"].get<double>(), 1e-9);
    EXPECT_EQ(w["probes"].size(), 8u);
    std::remove(path.c_str());
}

TEST(Cli, PhysicsCommands)
{
    auto x = run({"xy", "--j", "2", "--N", "6", "--m1", "1"});
    ASSERT_EQ(x.code, 0);
    EXPECT_LE(x.out["closure"]["residual"].get<double>(), 1e-8);
    EXPECT_LE(x.out["stationarity"]["residual"].get<double>(), 1e-9);
    EXPECT_EQ(run({"xy", "--W", "0"}).code, 3);

    auto csv = temp_path("toda.csv");
    auto t = run({"toda", "--g2", "4", "--g3", "1", "--p", "0.37", "--omega", "0.7", "--steps", "4", "--csv", csv});
    ASSERT_EQ(t.code, 0) << t.text;
    EXPECT_LE(t.out["equations"]["residual_b"].get<double>(), 1e-6);
    EXPECT_NEAR(t.out["convergence"]["ratio"].get<double>(), 4, 0.2);
    EXPECT_LE(t.out["phase_portrait"]["residual"].get<double>(), 1e-7);
    std::ifstream in(csv);
    int lines = 0;
    for (std::string l; std::getline(in, l);) ++lines;
    EXPECT_EQ(lines, 1 + 5 * 6);
    std::remove(csv.c_str());
}

TEST(Cli, CrosscheckIsDeterministic)
{
    auto a = run({"crosscheck", "--seed", "7", "--cases", "10"});
    auto b = run({"crosscheck", "--seed", "7", "--cases", "10", "--threads", "3"});
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.text, b.text);
    EXPECT_TRUE(a.out["all_agree"].get<bool>());
    EXPECT_NE(a.text, run({"crosscheck", "--seed", "8", "--cases", "10"}).text);
}

TEST(Cli, ExitCodes)
{
    EXPECT_EQ(run({"nonsense"}).code, 2);
    EXPECT_EQ(run({"analyze"}).code, 2);
    EXPECT_EQ(run({"analyze", "--curve-json", "/nonexistent/c.json"}).code, 2);
    EXPECT_EQ(run({"bicentric", "--R", "1", "--r", "2"}).code, 2);
    // a perfect square has no Pell-Abel problem
    auto r = run({"pell-abel", "--quartic", "1,0,-2,0,1"});
    EXPECT_EQ(r.code, 2) << r.text;
    EXPECT_TRUE(r.out.contains("error"));
    EXPECT_EQ(run({"--help"}).code, 0);
}
