// widomk: build weakly equilibrium Cantor sets and certify Widom-factor bounds.
#include <widomk/cli/commands.hpp>

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

struct Overrides {
    std::string config_path;
    std::string sequence_json;
    std::string gamma_json;
    std::optional<unsigned> precision_bits;
    std::optional<unsigned> smax;
    std::optional<unsigned> s;
    std::optional<std::uint64_t> n_max;
    std::optional<std::string> eps_cap;
    std::optional<std::string> eps_green;
    std::vector<std::string> x0;
    std::optional<std::string> out;
    std::optional<std::string> format;
    bool no_plot = false;
};

widomk::cli::RunConfig resolve(const Overrides& o)
{
    using namespace widomk::cli;
    RunConfig c = o.config_path.empty() ? RunConfig{} : load_config(o.config_path);
    auto inline_json = [](const std::string& text, const char* what) {
        try {
            return json::parse(text);
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("--") + what + ": " + e.what());
        }
    };
    if (!o.sequence_json.empty()) {
        c.sequence = inline_json(o.sequence_json, "sequence");
        c.gamma.reset();
    }
    if (!o.gamma_json.empty()) {
        c.gamma = inline_json(o.gamma_json, "gamma");
        c.sequence.reset();
    }
    if (o.precision_bits)
        c.precision.base_bits = *o.precision_bits;
    if (o.smax) {
        c.s_max = *o.smax;
        c.s = std::min(c.s, c.s_max);
    }
    if (o.s)
        c.s = *o.s;
    if (o.n_max)
        c.n_max = *o.n_max;
    if (o.eps_cap)
        c.eps_cap = *o.eps_cap;
    if (o.eps_green)
        c.eps_green = *o.eps_green;
    if (!o.x0.empty())
        c.x0 = o.x0;
    if (o.out)
        c.output.dir = *o.out;
    if (o.format)
        c.output.formats = {*o.format};
    if (o.no_plot)
        c.output.plot = false;
    return c;
}

}  // namespace

int main(int argc, char** argv)
{
    using namespace widomk::cli;
    CLI::App app{"Widom factors and Green brackets on weakly equilibrium Cantor sets"};
    app.require_subcommand(1);
    Overrides o;
    app.add_option("--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--sequence", o.sequence_json, R"(inline sequence, e.g. '{"family":"constant","c":"e"}')");
    app.add_option("--gamma", o.gamma_json, R"(inline gamma, e.g. '{"values":["1/6"],"tail":"constant"}')");
    app.add_option("--precision-bits", o.precision_bits, "base precision in bits");
    app.add_option("--smax", o.smax, "deepest level S_max (<= 16)");
    app.add_option("--s", o.s, "top level for theorem 2 and per-level reports");
    app.add_option("--n-max", o.n_max, "largest degree for theorem 1 and L2 reports");
    app.add_option("--eps-cap", o.eps_cap, "capacity tail tolerance");
    app.add_option("--eps-green", o.eps_green, "Green bracket width target");
    app.add_option("--x0", o.x0, "exterior point (repeatable)")->allow_extra_args(false);
    app.add_option("--out", o.out, "output directory");
    app.add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app.add_flag("--no-plot", o.no_plot, "skip plot-data files");

    auto* build = app.add_subcommand("build", "construct the model and write gamma, r_s and capacities");
    std::string which;
    auto* verify = app.add_subcommand("verify", "certify theorem rows or run the invariant suite");
    verify->add_option("which", which, "thm1, thm2 or invariants")
        ->required()
        ->check(CLI::IsMember({"thm1", "thm2", "invariants"}));
    std::string quantity;
    auto* report = app.add_subcommand("report", "write a table for one quantity");
    report->add_option("quantity", quantity, "widom-sup, widom-l2, widom-res, green, harnack or levels")
        ->required()
        ->check(CLI::IsMember({"widom-sup", "widom-l2", "widom-res", "green", "harnack", "levels"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    return run_guarded(
        [&]() -> CommandResult {
            const RunConfig cfg = resolve(o);
            if (build->parsed())
                return cmd_build(cfg);
            if (verify->parsed())
                return cmd_verify(cfg, which);
            return cmd_report(cfg, quantity);
        },
        std::cout, std::cerr);
}
