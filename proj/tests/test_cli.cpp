#include <widomk/cli/commands.hpp>

#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

using namespace widomk;
using namespace widomk::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("widomk-test-" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunConfig constant_e_config(const fs::path& dir)
{
    RunConfig c;
    c.sequence = json{{"family", "constant"}, {"c", "e"}};
    c.prefix = 256;
    c.s_max = 4;
    c.s = 3;
    c.n_max = 64;
    c.output.dir = dir.string();
    return c;
}

int run_binary(const std::string& args)
{
    const char* bin = std::getenv("WIDOMK_BIN");
    if (!bin)
        return -1;
    const int status = std::system((std::string(bin) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -2;
}

}  // namespace

TEST_CASE("number expressions", "[cli]")
{
    PrecisionScope scope(parse_bits);
    CHECK(parse_number("1/6") == Real(1) / 6);
    CHECK(abs(parse_number("e") - exp(Real(1))) < pow2(-500));
    CHECK(abs(parse_number("e^2") - exp(Real(2))) < pow2(-500));
    CHECK(abs(parse_number("sqrt(6)/2") - sqrt(Real(6)) / 2) < pow2(-500));
    CHECK(parse_number("-0.5") == Real("-0.5"));
    CHECK(parse_number("2*(3+4)") == 14);
    CHECK(abs(parse_number("1e-30") - Real("1e-30")) < pow2(-600));
    CHECK(abs(parse_number("ln(2) + exp(0)") - (log(Real(2)) + 1)) < pow2(-500));
    CHECK(abs(parse_number("2^-3^2") - pow2(-9)) < pow2(-500));
    for (const char* bad : {"", "1/", "foo", "(1", "1 2", "sqrt(-"})
        CHECK_THROWS_AS(parse_number(bad), ConfigError);
}

TEST_CASE("config round trip", "[cli]")
{
    RunConfig c = constant_e_config("out-x");
    c.x0 = {"2", "-1/2"};
    c.precision.slope = "3/2";
    c.output.formats = {"csv", "json"};
    const RunConfig back = parse_config(to_json(c));
    CHECK(back == c);
    CHECK(to_json(back) == to_json(c));
}

TEST_CASE("config validation", "[cli]")
{
    RunConfig c = constant_e_config("unused");
    CHECK_NOTHROW(validate(c));

    RunConfig both = c;
    both.gamma = json{{"values", {"1/6"}}};
    CHECK_THROWS_AS(validate(both), ConfigError);

    RunConfig deep = c;
    deep.s_max = 17;
    CHECK_THROWS_AS(validate(deep), ConfigError);

    RunConfig big_gamma;
    big_gamma.gamma = json{{"values", {"0.3"}}, {"tail", "constant"}};
    CHECK_THROWS_AS(validate(big_gamma), ConfigError);

    RunConfig bad_family = c;
    bad_family.sequence = json{{"family", "fibonacci"}};
    CHECK_THROWS_AS(validate(bad_family), ConfigError);

    CHECK_THROWS_AS(parse_config(json{{"sequence", {{"family", "constant"}, {"c", 3}}}, {"colour", "red"}}),
                    ConfigError);

    RunConfig slope = c;
    slope.precision.slope = "four";
    CHECK_THROWS_AS(validate(slope), ConfigError);
}

TEST_CASE("sequence specs from JSON", "[cli]")
{
    PrecisionScope scope(parse_bits);
    const auto p = sequence_spec(json{{"family", "power"}, {"a", "e"}, {"p", "1/2"}}, parse_bits);
    REQUIRE(std::holds_alternative<PowerFamily>(p));
    CHECK(std::get<PowerFamily>(p).p == Real("0.5"));
    const auto t = sequence_spec(json{{"family", "table"}, {"values", {"e^2", "e"}}, {"extension", "repeat_last"}},
                                 parse_bits);
    REQUIRE(std::holds_alternative<TableFamily>(t));
    CHECK(std::get<TableFamily>(t).extension == TableFamily::Extension::repeat_last);
    const auto q = sequence_spec(
        json{{"family", "perturbed"}, {"base", {{"family", "logarithmic"}, {"a", 3}, {"b", 2}}}, {"amplitude", "0.1"},
             {"seed", 5}},
        parse_bits);
    REQUIRE(std::holds_alternative<PerturbedFamily>(q));
    CHECK(std::get<PerturbedFamily>(q).seed == 5);
}

TEST_CASE("CSV escaping", "[cli]")
{
    CHECK(csv_escape("plain") == "plain");
    CHECK(csv_escape("a,b") == "\"a,b\"");
    CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
}

TEST_CASE("build writes deterministic tables", "[cli]")
{
    const fs::path a = scratch("build-a"), b = scratch("build-b");
    RunConfig ca = constant_e_config(a), cb = constant_e_config(b);
    ca.output.formats = cb.output.formats = {"csv", "json"};
    const CommandResult ra = cmd_build(ca);
    const CommandResult rb = cmd_build(cb);
    CHECK(ra.exit_code == exit_ok);
    for (const char* f : {"gamma.csv", "levels_summary.csv", "model.csv", "gamma.json"}) {
        REQUIRE(fs::exists(a / f));
        if (std::string(f).ends_with(".csv"))
            CHECK(slurp(a / f) == slurp(b / f));
    }
    // the written config reloads to the same run
    RunConfig again = load_config((a / "config.json").string());
    CHECK(again == ca);
    const json doc = json::parse(slurp(a / "gamma.json"));
    CHECK(doc.at("precision_bits").get<unsigned>() == 256);
    CHECK(doc.at("rows").size() == 5);
    CHECK(doc.at("rows")[0].contains("gamma_hex"));
}

TEST_CASE("level export has one row per interval", "[cli]")
{
    const fs::path dir = scratch("levels");
    RunConfig c = constant_e_config(dir);
    c.s = 3;
    CHECK(cmd_report(c, "levels").exit_code == exit_ok);
    const std::string csv = slurp(dir / "levels.csv");
    CHECK(csv.starts_with("s,j,left,right\n"));
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 8);
}

TEST_CASE("verify commands in process", "[cli]")
{
    const fs::path dir = scratch("verify");
    RunConfig c = constant_e_config(dir);
    const CommandResult t1 = cmd_verify(c, "thm1");
    CHECK(t1.exit_code == exit_ok);
    CHECK(t1.summary.find(" 0 fail") != std::string::npos);
    c.x0 = {"2", "-0.5"};
    CHECK(cmd_verify(c, "thm2").exit_code == exit_ok);
    CHECK(cmd_verify(c, "invariants").exit_code == exit_ok);
    CHECK_THROWS_AS(cmd_verify(c, "thm3"), ConfigError);
}

TEST_CASE("thm1 on a direct gamma is a configuration error", "[cli]")
{
    RunConfig c;
    c.gamma = json{{"values", {"1/6"}}, {"tail", "constant"}};
    c.output.dir = scratch("direct").string();
    std::ostringstream out, err;
    CHECK(run_guarded([&] { return cmd_verify(c, "thm1"); }, out, err) == exit_config);
    CHECK_FALSE(err.str().empty());
}

TEST_CASE("uncertified tails map to the exhausted code", "[cli]")
{
    RunConfig c;
    c.gamma = json{{"values", {"1/6", "1/7"}}, {"tail", "none"}};
    c.s_max = 4;
    c.s = 2;
    c.output.dir = scratch("uncertified").string();
    std::ostringstream out, err;
    CHECK(run_guarded([&] { return cmd_verify(c, "thm2"); }, out, err) == exit_exhausted);
}

TEST_CASE("binary exit codes", "[cli]")
{
    if (!std::getenv("WIDOMK_BIN"))
        SKIP("WIDOMK_BIN not set");
    const std::string out = "--out " + scratch("bin").string();
    CHECK(run_binary(out + R"( --sequence '{"family":"constant","c":"e"}' --smax 4 build)") == 0);
    CHECK(run_binary(out + R"( --gamma '{"values":["0.3"]}' build)") == 2);
    CHECK(run_binary(out + " --smax 4 build") == 2);
    CHECK(run_binary("frobnicate") == 2);
    CHECK(run_binary(out + R"( --sequence '{"family":"constant","c":"e"}' --smax 4 --s 3 --x0 2 verify thm2)") == 0);
    CHECK(run_binary(out + R"( --gamma '{"values":["1/6"],"tail":"none"}' --smax 4 --s 2 --x0 2 verify thm2)") == 3);
}
