#ifndef WIDOMK_CLI_CONFIG_HPP
#define WIDOMK_CLI_CONFIG_HPP

#include "../cantor.hpp"
#include "../sequences.hpp"

#include <json.hpp>

#include <cctype>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace widomk::cli {

using json = nlohmann::json;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr unsigned s_max_ceiling = 16;
inline constexpr unsigned parse_bits = 512;

/// Numbers in configs are small expressions: "e", "1/6", "e^2", "sqrt(2)/2",
/// "1e-30", "-0.5", with + - * / ^, parentheses, e, pi, sqrt, exp, ln/log.
class ExpressionParser {
public:
    ExpressionParser(std::string text, unsigned bits) : text_(std::move(text)), bits_(bits) {}

    Real parse()
    {
        PrecisionScope scope(bits_);
        pos_ = 0;
        Real v = expr();
        skip();
        if (pos_ != text_.size())
            error("unexpected '" + std::string(1, text_[pos_]) + "'");
        return v;
    }

private:
    [[noreturn]] void error(const std::string& what) const
    {
        throw ConfigError("number \"" + text_ + "\": " + what + " at offset " + std::to_string(pos_));
    }

    void skip()
    {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    bool eat(char c)
    {
        skip();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Real expr()
    {
        Real v = term();
        for (;;) {
            if (eat('+'))
                v = v + term();
            else if (eat('-'))
                v = v - term();
            else
                return v;
        }
    }

    Real term()
    {
        Real v = unary();
        for (;;) {
            if (eat('*')) {
                v = v * unary();
            } else if (eat('/')) {
                const Real d = unary();
                if (d == 0)
                    error("division by zero");
                v = v / d;
            } else {
                return v;
            }
        }
    }

    Real unary()
    {
        if (eat('-'))
            return -unary();
        if (eat('+'))
            return unary();
        return power();
    }

    Real power()
    {
        Real base = atom();
        if (eat('^'))
            return pow(base, unary());
        return base;
    }

    Real atom()
    {
        skip();
        if (pos_ >= text_.size())
            error("unexpected end");
        const char c = text_[pos_];
        if (eat('(')) {
            Real v = expr();
            if (!eat(')'))
                error("missing ')'");
            return v;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return number();
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::string id;
            while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_])))
                id += text_[pos_++];
            if (id == "e")
                return euler_e();
            if (id == "pi")
                return pi();
            if (!eat('('))
                error("unknown name '" + id + "'");
            const Real arg = expr();
            if (!eat(')'))
                error("missing ')'");
            if (id == "sqrt") {
                if (arg < 0)
                    error("sqrt of a negative number");
                return sqrt(arg);
            }
            if (id == "exp")
                return exp(arg);
            if (id == "ln" || id == "log") {
                if (!(arg > 0))
                    error("log of a nonpositive number");
                return log(arg);
            }
            error("unknown function '" + id + "'");
        }
        error("unexpected '" + std::string(1, c) + "'");
    }

    Real number()
    {
        const std::size_t start = pos_;
        auto digits = [&] {
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                ++pos_;
        };
        digits();
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            digits();
        }
        // an exponent only when digits follow; a bare trailing 'e' is a parse error
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t p = pos_ + 1;
            if (p < text_.size() && (text_[p] == '+' || text_[p] == '-'))
                ++p;
            if (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
                pos_ = p;
                digits();
            }
        }
        const std::string lit = text_.substr(start, pos_ - start);
        if (lit == ".")
            error("malformed number");
        return Real(lit);
    }

    std::string text_;
    unsigned bits_;
    std::size_t pos_ = 0;
};

inline Real parse_number(const std::string& text, unsigned bits = parse_bits)
{
    return ExpressionParser(text, bits).parse();
}

/// JSON numbers are accepted too; they are kept as their JSON text.
inline std::string number_text(const json& j, const std::string& key)
{
    if (j.is_string())
        return j.get<std::string>();
    if (j.is_number())
        return j.dump();
    throw ConfigError("'" + key + "' must be a number or a number expression");
}

struct PrecisionConfig {
    unsigned base_bits = 256;
    std::string slope = "4";  // bits per node, integer or p/q
    unsigned max_escalations = 2;
    unsigned ceiling_bits = 1u << 22;

    bool operator==(const PrecisionConfig&) const = default;
};

struct OutputConfig {
    std::string dir = "widomk-out";
    std::vector<std::string> formats{"csv"};
    bool plot = true;

    bool operator==(const OutputConfig&) const = default;
};

struct RunConfig {
    std::optional<json> sequence;  // {"family": ..., params}
    std::optional<json> gamma;     // {"values": [...], "tail": ...}
    std::uint64_t prefix = 4096;   // regularization length
    PrecisionConfig precision;
    unsigned s_max = 10;
    std::string eps_cap = "1e-30";
    std::string eps_green = "1e-12";
    std::vector<std::string> x0;
    std::uint64_t n_max = 1024;
    unsigned s = 8;  // top level for theorem 2 and per-level reports
    unsigned oracle_nodes = 64;
    OutputConfig output;

    bool operator==(const RunConfig&) const = default;
};

inline void require_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where)
{
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed)
            ok = ok || it.key() == a;
        if (!ok)
            throw ConfigError(where + ": unknown key '" + it.key() + "'");
    }
}

inline PrecisionPolicy make_policy(const PrecisionConfig& p)
{
    PrecisionPolicy pol;
    pol.base_bits = p.base_bits;
    pol.max_escalations = p.max_escalations;
    pol.ceiling_bits = p.ceiling_bits;
    const auto slash = p.slope.find('/');
    try {
        std::size_t used = 0;
        if (slash == std::string::npos) {
            pol.slope_num = std::stoull(p.slope, &used);
            pol.slope_den = 1;
            if (used != p.slope.size())
                throw std::invalid_argument("trailing text");
        } else {
            pol.slope_num = std::stoull(p.slope.substr(0, slash), &used);
            pol.slope_den = std::stoull(p.slope.substr(slash + 1));
        }
    } catch (const std::logic_error&) {
        throw ConfigError("precision.slope_bits_per_node must be an integer or p/q, got \"" + p.slope + "\"");
    }
    try {
        pol.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return pol;
}

inline unsigned value_bits(const RunConfig& c)
{
    return std::max(parse_bits, c.precision.base_bits);
}

inline SequenceSpec sequence_spec(const json& j, unsigned bits)
{
    if (!j.is_object() || !j.contains("family"))
        throw ConfigError("sequence: needs a 'family'");
    const std::string family = j.at("family").get<std::string>();
    auto num = [&](const char* key) {
        if (!j.contains(key))
            throw ConfigError("sequence." + family + ": missing '" + key + "'");
        return parse_number(number_text(j.at(key), key), bits);
    };
    if (family == "constant") {
        require_keys(j, {"family", "c"}, "sequence");
        return ConstantFamily{num("c")};
    }
    if (family == "power") {
        require_keys(j, {"family", "a", "p"}, "sequence");
        return PowerFamily{num("a"), num("p")};
    }
    if (family == "logarithmic") {
        require_keys(j, {"family", "a", "b"}, "sequence");
        return LogarithmicFamily{num("a"), num("b")};
    }
    if (family == "table") {
        require_keys(j, {"family", "values", "extension"}, "sequence");
        TableFamily t;
        if (!j.contains("values") || !j.at("values").is_array() || j.at("values").empty())
            throw ConfigError("sequence.table: 'values' must be a nonempty array");
        for (const auto& v : j.at("values"))
            t.values.push_back(parse_number(number_text(v, "values"), bits));
        const std::string ext = j.value("extension", "none");
        if (ext == "repeat_last")
            t.extension = TableFamily::Extension::repeat_last;
        else if (ext != "none")
            throw ConfigError("sequence.table: extension must be none or repeat_last");
        return t;
    }
    if (family == "perturbed") {
        require_keys(j, {"family", "base", "amplitude", "seed"}, "sequence");
        if (!j.contains("base"))
            throw ConfigError("sequence.perturbed: missing 'base'");
        const SequenceSpec base = sequence_spec(j.at("base"), bits);
        PerturbedFamily p;
        if (const auto* pw = std::get_if<PowerFamily>(&base))
            p.base = *pw;
        else if (const auto* lg = std::get_if<LogarithmicFamily>(&base))
            p.base = *lg;
        else
            throw ConfigError("sequence.perturbed: base must be power or logarithmic");
        p.amplitude = num("amplitude");
        p.seed = j.value("seed", std::uint64_t{0});
        return p;
    }
    throw ConfigError("sequence: unknown family '" + family + "'");
}

inline DirectGamma direct_gamma(const json& j, unsigned bits)
{
    require_keys(j, {"values", "tail"}, "gamma");
    if (!j.contains("values") || !j.at("values").is_array() || j.at("values").empty())
        throw ConfigError("gamma: 'values' must be a nonempty array");
    DirectGamma d;
    for (const auto& v : j.at("values"))
        d.prefix.push_back(parse_number(number_text(v, "gamma.values"), bits));
    const json tail = j.value("tail", json("constant"));
    if (tail.is_string()) {
        const std::string t = tail.get<std::string>();
        if (t == "constant")
            d.tail = TailCertificate{};
        else if (t != "none")
            throw ConfigError("gamma.tail: expected constant, none, or an object");
    } else if (tail.is_object() && tail.contains("bounded")) {
        const json& b = tail.at("bounded");
        if (!b.is_array() || b.size() != 2)
            throw ConfigError("gamma.tail.bounded: expected [lo, hi]");
        TailCertificate c;
        c.kind = TailCertificate::Kind::bounded;
        c.lo = parse_number(number_text(b[0], "lo"), bits);
        c.hi = parse_number(number_text(b[1], "hi"), bits);
        d.tail = c;
    } else {
        throw ConfigError("gamma.tail: expected constant, none, or {\"bounded\": [lo, hi]}");
    }
    return d;
}

inline void validate(const RunConfig& c)
{
    if (c.sequence.has_value() == c.gamma.has_value())
        throw ConfigError("config: give exactly one of 'sequence' or 'gamma'");
    if (c.s_max > s_max_ceiling)
        throw ConfigError("config: s_max = " + std::to_string(c.s_max) + " exceeds the ceiling " +
                          std::to_string(s_max_ceiling));
    if (c.s > c.s_max)
        throw ConfigError("config: s = " + std::to_string(c.s) + " exceeds s_max");
    if (c.prefix < 4)
        throw ConfigError("config: prefix must be >= 4");
    if (c.n_max < 1)
        throw ConfigError("config: n_max must be >= 1");
    if (c.oracle_nodes < 1)
        throw ConfigError("config: oracle_nodes must be >= 1");
    const unsigned bits = value_bits(c);
    for (const auto* eps : {&c.eps_cap, &c.eps_green})
        if (!(parse_number(*eps, bits) > 0))
            throw ConfigError("config: eps values must be positive");
    for (const auto& x : c.x0)
        parse_number(x, bits);
    for (const auto& f : c.output.formats)
        if (f != "csv" && f != "json")
            throw ConfigError("config: unknown output format '" + f + "'");
    make_policy(c.precision);
    if (c.sequence)
        sequence_spec(*c.sequence, bits);
    if (c.gamma) {
        try {
            Gamma::direct(direct_gamma(*c.gamma, bits), bits);
        } catch (const InvalidGamma& e) {
            throw ConfigError(e.what());
        }
    }
}

inline RunConfig parse_config(const json& j)
{
    if (!j.is_object())
        throw ConfigError("config: top level must be an object");
    require_keys(j,
                 {"sequence", "gamma", "prefix", "precision", "s_max", "eps_cap", "eps_green", "x0", "n_max", "s",
                  "oracle_nodes", "output"},
                 "config");
    RunConfig c;
    try {
        if (j.contains("sequence"))
            c.sequence = j.at("sequence");
        if (j.contains("gamma"))
            c.gamma = j.at("gamma");
        c.prefix = j.value("prefix", c.prefix);
        if (j.contains("precision")) {
            const json& p = j.at("precision");
            require_keys(p, {"base_bits", "slope_bits_per_node", "max_escalations", "ceiling_bits"}, "precision");
            c.precision.base_bits = p.value("base_bits", c.precision.base_bits);
            if (p.contains("slope_bits_per_node"))
                c.precision.slope = number_text(p.at("slope_bits_per_node"), "slope_bits_per_node");
            c.precision.max_escalations = p.value("max_escalations", c.precision.max_escalations);
            c.precision.ceiling_bits = p.value("ceiling_bits", c.precision.ceiling_bits);
        }
        c.s_max = j.value("s_max", c.s_max);
        if (j.contains("eps_cap"))
            c.eps_cap = number_text(j.at("eps_cap"), "eps_cap");
        if (j.contains("eps_green"))
            c.eps_green = number_text(j.at("eps_green"), "eps_green");
        if (j.contains("x0")) {
            if (!j.at("x0").is_array())
                throw ConfigError("config: x0 must be an array");
            for (const auto& x : j.at("x0"))
                c.x0.push_back(number_text(x, "x0"));
        }
        c.n_max = j.value("n_max", c.n_max);
        c.s = j.value("s", std::min(c.s, c.s_max));
        c.oracle_nodes = j.value("oracle_nodes", c.oracle_nodes);
        if (j.contains("output")) {
            const json& o = j.at("output");
            require_keys(o, {"dir", "formats", "plot"}, "output");
            c.output.dir = o.value("dir", c.output.dir);
            if (o.contains("formats"))
                c.output.formats = o.at("formats").get<std::vector<std::string>>();
            c.output.plot = o.value("plot", c.output.plot);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

inline RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return parse_config(j);
}

inline json to_json(const RunConfig& c)
{
    json j;
    if (c.sequence)
        j["sequence"] = *c.sequence;
    if (c.gamma)
        j["gamma"] = *c.gamma;
    j["prefix"] = c.prefix;
    j["precision"] = {{"base_bits", c.precision.base_bits},
                      {"slope_bits_per_node", c.precision.slope},
                      {"max_escalations", c.precision.max_escalations},
                      {"ceiling_bits", c.precision.ceiling_bits}};
    j["s_max"] = c.s_max;
    j["eps_cap"] = c.eps_cap;
    j["eps_green"] = c.eps_green;
    j["x0"] = c.x0;
    j["n_max"] = c.n_max;
    j["s"] = c.s;
    j["oracle_nodes"] = c.oracle_nodes;
    j["output"] = {{"dir", c.output.dir}, {"formats", c.output.formats}, {"plot", c.output.plot}};
    return j;
}

/// Model for a validated config. Derived models regularize `prefix` terms.
inline std::shared_ptr<CantorModel> build_model(const RunConfig& c)
{
    const unsigned bits = value_bits(c);
    const PrecisionPolicy pol = make_policy(c.precision);
    if (c.sequence)
        return make_derived_model(sequence_spec(*c.sequence, bits), c.prefix, pol, c.s_max);
    try {
        return std::make_shared<CantorModel>(Gamma::direct(direct_gamma(*c.gamma, bits), bits), pol, c.s_max);
    } catch (const InvalidGamma& e) {
        throw ConfigError(e.what());
    }
}

}  // namespace widomk::cli

#endif  // WIDOMK_CLI_CONFIG_HPP
