#ifndef WIDOMK_CLI_REPORT_HPP
#define WIDOMK_CLI_REPORT_HPP

#include "../numerics.hpp"
#include "config.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace widomk::cli {

/// One table cell: CSV text plus, for reals, an exact hex rendering for JSON.
struct Cell {
    std::string text;
    std::string hex;
    bool numeric = false;
};

inline Cell cell(std::string s) { return {std::move(s), {}, false}; }
inline Cell cell(const char* s) { return {s, {}, false}; }
inline Cell cell(std::uint64_t v) { return {std::to_string(v), {}, true}; }
inline Cell cell(unsigned v) { return {std::to_string(v), {}, true}; }
inline Cell cell(bool b) { return {b ? "true" : "false", {}, false}; }
inline Cell cell(const Real& x) { return {to_decimal(x), to_hexfloat(x), true}; }

/// Log-domain values are reported as the value itself.
inline Cell cell(const LogScalar& v)
{
    return cell(v.to_real());
}

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row)
    {
        if (row.size() != columns.size())
            throw std::logic_error("table " + name + ": row width mismatch");
        rows.push_back(std::move(row));
    }
};

inline std::string csv_escape(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

class ReportWriter {
public:
    ReportWriter(const RunConfig& cfg, unsigned precision_bits)
        : dir_(cfg.output.dir), formats_(cfg.output.formats), plot_(cfg.output.plot), cfg_(cfg),
          bits_(precision_bits)
    {
    }

    /// Writes the effective config next to the reports so a run can be replayed.
    void write_config()
    {
        std::filesystem::create_directories(dir_);
        const auto path = dir_ / "config.json";
        std::ofstream out(path);
        out << to_json(cfg_).dump(2) << "\n";
        check(out, path);
        files_.push_back(path.string());
    }

    void write(const Table& t)
    {
        std::filesystem::create_directories(dir_);
        for (const auto& f : formats_) {
            if (f == "csv")
                write_csv(t);
            else if (f == "json")
                write_json(t);
        }
    }

    /// Plot data: whitespace-separated columns with a '#' header line.
    void write_plot(const std::string& name, const std::vector<std::string>& columns,
                    const std::vector<std::vector<std::string>>& rows)
    {
        if (!plot_)
            return;
        std::filesystem::create_directories(dir_);
        const auto path = dir_ / (name + ".dat");
        std::ofstream out(path);
        out << "#";
        for (const auto& c : columns)
            out << " " << c;
        out << "\n";
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i)
                out << (i ? " " : "") << r[i];
            out << "\n";
        }
        check(out, path);
        files_.push_back(path.string());
    }

    const std::vector<std::string>& files() const { return files_; }

private:
    static void check(const std::ofstream& out, const std::filesystem::path& path)
    {
        if (!out)
            throw ConfigError("cannot write " + path.string());
    }

    void write_csv(const Table& t)
    {
        const auto path = dir_ / (t.name + ".csv");
        std::ofstream out(path);
        for (std::size_t i = 0; i < t.columns.size(); ++i)
            out << (i ? "," : "") << t.columns[i];
        out << "\n";
        for (const auto& row : t.rows) {
            for (std::size_t i = 0; i < row.size(); ++i)
                out << (i ? "," : "") << csv_escape(row[i].text);
            out << "\n";
        }
        check(out, path);
        files_.push_back(path.string());
    }

    void write_json(const Table& t)
    {
        json rows = json::array();
        for (const auto& row : t.rows) {
            json r = json::object();
            for (std::size_t i = 0; i < row.size(); ++i) {
                r[t.columns[i]] = row[i].text;
                if (!row[i].hex.empty())
                    r[t.columns[i] + "_hex"] = row[i].hex;
            }
            rows.push_back(std::move(r));
        }
        json doc = {{"table", t.name},
                     {"precision_bits", bits_},
                     {"decimal_digits", digits10_for_bits(bits_) + 1},
                     {"config", to_json(cfg_)},
                     {"rows", std::move(rows)}};
        const auto path = dir_ / (t.name + ".json");
        std::ofstream out(path);
        out << doc.dump(2) << "\n";
        check(out, path);
        files_.push_back(path.string());
    }

    std::filesystem::path dir_;
    std::vector<std::string> formats_;
    bool plot_;
    RunConfig cfg_;
    unsigned bits_;
    std::vector<std::string> files_;
};

}  // namespace widomk::cli

#endif  // WIDOMK_CLI_REPORT_HPP
