#include <doctest.h>

#include "crowdval/cli.hpp"
#include "crowdval/text_io.hpp"

#include <json.hpp>

#include <filesystem>
#include <sstream>

using namespace crowdval;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::execute(args, out, err);
    return {code, out.str(), err.str()};
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& f) const { return (path / f).string(); }
};

const char* kSmallSpec = R"({"case": "B", "population": 4000, "contributors": 1000, "campaign": {"m": 200}})";

}  // namespace

TEST_CASE("cli: profile") {
    TempDir dir("crowdval_cli_profile");
    io::write_file(dir / "one.csv", "contributor_id,value\nc1,42.5\n");
    auto r = run({"profile", "--in", dir / "one.csv", "--bin-width", "5", "--out", dir / "p.json"});
    REQUIRE(r.code == cli::kExitOk);
    const auto j = nlohmann::json::parse(io::read_file(dir / "p.json"));
    REQUIRE(j.at("bins").size() == 1);
    CHECK(j.at("bins")[0].at("p") == 1.0);

    io::write_file(dir / "four.csv", "contributor_id,value\na,10\nb,11\nc,12\nd,26\n");
    r = run({"profile", "--in", dir / "four.csv", "--bin-width", "5", "--out", dir / "p.csv"});
    REQUIRE(r.code == cli::kExitOk);
    CHECK(io::read_file(dir / "p.csv") == "v,p,kappa\n11,0.75,3\n26,0.25,1\n");

    io::write_file(dir / "bad.csv", "contributor_id,value\na,fast\n");
    CHECK(run({"profile", "--in", dir / "bad.csv", "--bin-width", "5", "--out", dir / "x.json"}).code ==
          cli::kExitConfig);
    CHECK(run({"profile", "--in", dir / "one.csv", "--bin-width", "0", "--out", dir / "x.json"}).code ==
          cli::kExitConfig);
}

TEST_CASE("cli: missing inputs and usage errors") {
    TempDir dir("crowdval_cli_errors");
    auto r = run({"profile", "--in", dir / "nope.csv", "--bin-width", "5", "--out", dir / "p.json"});
    CHECK(r.code == cli::kExitConfig);
    CHECK(r.err.find("nope.csv") != std::string::npos);

    io::write_file(dir / "broken.json", "{\n  \"case\": \"A\",\n  \"population\": \n}\n");
    r = run({"simulate", "--spec", dir / "broken.json", "--seed", "1", "--out", dir / "o"});
    CHECK(r.code == cli::kExitConfig);
    CHECK(r.err.find("line 4") != std::string::npos);

    io::write_file(dir / "spec.json", kSmallSpec);
    r = run({"simulate", "--spec", dir / "spec.json", "--out", dir / "o"});
    CHECK(r.code == cli::kExitConfig);
    CHECK(r.err.find("--seed") != std::string::npos);

    CHECK(run({}).code == cli::kExitConfig);
    CHECK(run({"launch"}).code == cli::kExitConfig);
    CHECK(run({"simulate", "--spec", dir / "spec.json", "--seed", "1", "--out", dir / "o", "--strategy", "best"})
              .code == cli::kExitConfig);
    CHECK(run({"--help"}).code == cli::kExitOk);
}

TEST_CASE("cli: simulate and report") {
    TempDir dir("crowdval_cli_sim");
    io::write_file(dir / "spec.json", kSmallSpec);
    auto r = run({"simulate", "--spec", dir / "spec.json", "--seed", "7", "--out", dir / "out"});
    REQUIRE(r.code == cli::kExitOk);
    const auto summary = nlohmann::json::parse(io::read_file(dir / "out/summary.json"));
    CHECK(summary.contains("posterior_ratio_at_truth"));
    CHECK(summary.at("seed") == 7);
    CHECK(fs::exists(dir / "out/cycles.csv"));

    r = run({"report", "--in", dir / "out", "--seed", "7", "--out", dir / "cmp.csv"});
    REQUIRE(r.code == cli::kExitOk);
    const auto table = io::parse_csv(io::read_file(dir / "cmp.csv"), "cmp");
    CHECK(table.rows.size() % 4 == 0);
    CHECK(run({"report", "--in", dir / "out", "--out", dir / "cmp.csv"}).code == cli::kExitConfig);

    // A target no population can meet.
    io::write_file(dir / "hard.json", R"({"population": 1200, "contributors": 1000, "campaign": {"m": 1000}})");
    r = run({"simulate", "--spec", dir / "hard.json", "--seed", "1", "--out", dir / "hard"});
    CHECK(r.code == cli::kExitCampaignFail);
    CHECK(nlohmann::json::parse(io::read_file(dir / "hard/summary.json")).at("status") == "FAIL");
}

TEST_CASE("cli: reshape and incentives") {
    TempDir dir("crowdval_cli_reshape");
    io::write_file(dir / "r.csv", "contributor_id,value\na,10\nb,11\nc,12\nd,26\n");
    REQUIRE(run({"profile", "--in", dir / "r.csv", "--bin-width", "5", "--out", dir / "p.json"}).code == 0);

    io::write_file(dir / "none.csv", "rater_id,value_index,score,received_time\n");
    REQUIRE(run({"reshape", "--in", dir / "p.json", "--ratings", dir / "none.csv", "--out", dir / "id.csv"}).code ==
            0);
    const auto identity = io::parse_csv(io::read_file(dir / "id.csv"), "id");
    for (const auto& row : identity.rows) CHECK(row[1] == row[2]);

    io::write_file(dir / "ratings.csv",
                   "rater_id,value_index,score,received_time\nw1,0,1,3\nw2,1,-1,4\nw3,1,0,5\n");
    REQUIRE(run({"reshape", "--in", dir / "p.json", "--ratings", dir / "ratings.csv", "--out", dir / "re.csv"})
                .code == 0);
    io::write_file(dir / "contrib.csv", "contributor_id,bin,quality\na,0,1\nb,0,1\nc,0,1\nd,1,2\n");
    auto r = run({"incentives", "--in", dir / "re.csv", "--contributions", dir / "contrib.csv", "--out",
                  dir / "inc", "--ratings", dir / "ratings.csv", "--budget-mode"});
    REQUIRE(r.code == 0);
    const auto pay = io::parse_csv(io::read_file(dir / "inc/contributors.csv"), "pay");
    double total = 0.0, budget = 0.0;
    for (const auto& row : pay.rows) {
        total += io::parse_double(row[1], "pi");
        budget += io::parse_double(row[3], "pi_budget");
    }
    CHECK(budget == doctest::Approx(total).epsilon(1e-12));
    const auto raters = io::parse_csv(io::read_file(dir / "inc/raters.csv"), "raters");
    CHECK(raters.rows.size() == 2);  // the neutral rater is untouched

    io::write_file(dir / "off.csv", "rater_id,value_index,score,received_time\nw1,9,1,3\n");
    CHECK(run({"reshape", "--in", dir / "p.json", "--ratings", dir / "off.csv", "--out", dir / "x.csv"}).code ==
          cli::kExitConfig);
}
