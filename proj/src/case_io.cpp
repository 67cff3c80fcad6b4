#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>

#include "psse/error.hpp"
#include "psse/grid_case.hpp"

namespace psse {

namespace {

constexpr double deg_to_rad = std::numbers::pi / 180.0;

// Widest tables MATPOWER itself writes (including OPF result columns).
constexpr std::size_t bus_max_columns = 17;
constexpr std::size_t branch_max_columns = 21;
constexpr std::size_t gen_max_columns = 25;

struct Row {
    std::vector<double> values;
    std::size_t line = 0;
};

struct Table {
    std::vector<Row> rows;
    std::size_t line = 0;
};

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::string_view strip_comment(std::string_view s) {
    auto pos = s.find('%');
    return pos == std::string_view::npos ? s : s.substr(0, pos);
}

std::optional<double> parse_number(std::string_view token) {
    if (!token.empty() && token.front() == '+') token.remove_prefix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size()) return std::nullopt;
    return value;
}

bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'; }

class CaseScanner {
  public:
    explicit CaseScanner(std::string_view text) : text_(text) {}

    void run() {
        std::size_t line_no = 0;
        std::size_t pos = 0;
        while (pos <= text_.size()) {
            auto end = text_.find('\n', pos);
            if (end == std::string_view::npos) end = text_.size();
            ++line_no;
            scan_line(strip_comment(text_.substr(pos, end - pos)), line_no);
            pos = end + 1;
        }
        if (current_) throw ParseError("unterminated matrix '" + current_name_ + "'", current_->line);
    }

    std::optional<double> base_mva;
    std::size_t base_mva_line = 0;
    std::unordered_map<std::string, Table> tables;

  private:
    void scan_line(std::string_view line, std::size_t line_no) {
        if (in_cell_) {
            if (line.find('}') != std::string_view::npos) in_cell_ = false;
            return;
        }
        if (current_) {
            scan_matrix_content(line, line_no);
            return;
        }
        line = trim(line);
        if (line.empty()) return;
        auto eq = line.find('=');
        if (eq == std::string_view::npos) return;
        auto lhs = trim(line.substr(0, eq));
        auto rhs = trim(line.substr(eq + 1));
        if (lhs.empty() || !std::all_of(lhs.begin(), lhs.end(), is_ident_char)) return;
        if (lhs.starts_with("mpc.")) lhs.remove_prefix(4);
        if (rhs.starts_with('{')) {
            if (rhs.find('}') == std::string_view::npos) in_cell_ = true;
            return;
        }
        if (rhs.starts_with('[')) {
            current_name_ = std::string(lhs);
            current_ = &tables[current_name_];
            current_->rows.clear();
            current_->line = line_no;
            scan_matrix_content(rhs.substr(1), line_no);
            return;
        }
        if (lhs == "baseMVA") {
            auto semi = rhs.find(';');
            auto token = trim(rhs.substr(0, semi));
            auto value = parse_number(token);
            if (!value) throw ParseError("malformed baseMVA value '" + std::string(token) + "'", line_no);
            base_mva = *value;
            base_mva_line = line_no;
        }
    }

    void scan_matrix_content(std::string_view content, std::size_t line_no) {
        std::size_t i = 0;
        while (i < content.size()) {
            char c = content[i];
            if (c == ']') {
                close_row(line_no);
                current_ = nullptr;
                return;
            }
            if (c == ';') {
                close_row(line_no);
                ++i;
                continue;
            }
            if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j < content.size() && !std::isspace(static_cast<unsigned char>(content[j])) &&
                   content[j] != ',' && content[j] != ';' && content[j] != ']')
                ++j;
            auto token = content.substr(i, j - i);
            auto value = parse_number(token);
            if (!value)
                throw ParseError(current_name_ + ": malformed number '" + std::string(token) + "'", line_no);
            pending_.values.push_back(*value);
            pending_.line = line_no;
            i = j;
        }
        // A newline inside brackets also terminates a row.
        close_row(line_no);
    }

    void close_row(std::size_t) {
        if (!pending_.values.empty()) current_->rows.push_back(std::move(pending_));
        pending_ = Row{};
    }

    std::string_view text_;
    Table* current_ = nullptr;
    std::string current_name_;
    Row pending_;
    bool in_cell_ = false;
};

Table const& require_table(CaseScanner const& scan, std::string const& name) {
    auto it = scan.tables.find(name);
    if (it == scan.tables.end()) throw ParseError("missing mpc." + name + " table");
    return it->second;
}

void check_width(Table const& table, std::string const& name, std::size_t min_cols, std::size_t max_cols,
                 std::vector<std::string>* warnings) {
    bool warned = false;
    for (auto const& row : table.rows) {
        if (row.values.size() < min_cols)
            throw ParseError(name + " row has " + std::to_string(row.values.size()) +
                                 " columns, expected at least " + std::to_string(min_cols),
                             row.line);
        if (row.values.size() > max_cols && !warned) {
            warned = true;
            if (warnings)
                warnings->push_back("line " + std::to_string(row.line) + ": " + name + " has " +
                                    std::to_string(row.values.size()) + " columns; columns beyond " +
                                    std::to_string(max_cols) + " ignored");
        }
    }
}

int as_int(double value, std::string const& what, std::size_t line) {
    if (!std::isfinite(value) || value != std::floor(value))
        throw ParseError(what + " must be an integer", line);
    return static_cast<int>(value);
}

double column(Row const& row, std::size_t col, double fallback) {
    return col < row.values.size() ? row.values[col] : fallback;
}

}  // namespace

std::size_t GridCase::index_of(int bus_id) const {
    auto it = index_.find(bus_id);
    if (it == index_.end()) throw ValidationError("unknown bus id " + std::to_string(bus_id));
    return it->second;
}

std::size_t GridCase::slack_index() const {
    for (std::size_t i = 0; i < buses.size(); ++i)
        if (buses[i].type == BusType::slack) return i;
    throw ValidationError("case has no slack bus");
}

double GridCase::voltage_setpoint(std::size_t bus) const {
    int id = buses.at(bus).id;
    for (auto const& g : gens)
        if (g.in_service && g.bus_id == id) return g.vg;
    return buses[bus].vm;
}

void GridCase::finalize() {
    index_.clear();
    if (!(base_mva > 0.0)) throw ValidationError("baseMVA must be positive");
    if (buses.empty()) throw ValidationError("case has no buses");
    std::size_t slack_count = 0;
    for (std::size_t i = 0; i < buses.size(); ++i) {
        if (!index_.emplace(buses[i].id, i).second)
            throw ValidationError("duplicate bus id " + std::to_string(buses[i].id));
        if (buses[i].type == BusType::slack) ++slack_count;
    }
    if (slack_count == 0) throw ValidationError("case has no slack bus");
    if (slack_count > 1) throw ValidationError("case has " + std::to_string(slack_count) + " slack buses");
    for (std::size_t k = 0; k < branches.size(); ++k) {
        auto const& br = branches[k];
        for (int id : {br.from_id, br.to_id})
            if (!index_.contains(id))
                throw ValidationError("branch " + std::to_string(k + 1) + " references unknown bus " +
                                      std::to_string(id));
        if (br.in_service && br.r == 0.0 && br.x == 0.0)
            throw ValidationError("branch " + std::to_string(k + 1) + " has zero impedance");
        if (!(br.tap > 0.0)) throw ValidationError("branch " + std::to_string(k + 1) + " has non-positive tap");
    }
    for (std::size_t k = 0; k < gens.size(); ++k)
        if (!index_.contains(gens[k].bus_id))
            throw ValidationError("generator " + std::to_string(k + 1) + " references unknown bus " +
                                  std::to_string(gens[k].bus_id));
}

GridCase parse_case(std::string_view text, std::vector<std::string>* warnings) {
    CaseScanner scan(text);
    scan.run();
    if (!scan.base_mva) throw ParseError("missing mpc.baseMVA");
    if (!(*scan.base_mva > 0.0)) throw ParseError("baseMVA must be positive", scan.base_mva_line);

    GridCase grid;
    grid.base_mva = *scan.base_mva;
    double const base = grid.base_mva;

    auto const& bus_table = require_table(scan, "bus");
    check_width(bus_table, "bus", 9, bus_max_columns, warnings);
    std::unordered_map<int, std::size_t> seen;
    for (auto const& row : bus_table.rows) {
        Bus bus;
        bus.id = as_int(row.values[0], "bus id", row.line);
        if (!seen.emplace(bus.id, row.line).second)
            throw ParseError("duplicate bus id " + std::to_string(bus.id), row.line);
        int type = as_int(row.values[1], "bus type", row.line);
        if (type < 1 || type > 3) throw ParseError("unsupported bus type " + std::to_string(type), row.line);
        bus.type = static_cast<BusType>(type);
        bus.pd = row.values[2] / base;
        bus.qd = row.values[3] / base;
        bus.gs = row.values[4] / base;
        bus.bs = row.values[5] / base;
        bus.vm = row.values[7];
        bus.va = row.values[8] * deg_to_rad;
        grid.buses.push_back(bus);
    }
    if (grid.buses.empty()) throw ParseError("empty bus table", bus_table.line);

    auto const& branch_table = require_table(scan, "branch");
    check_width(branch_table, "branch", 4, branch_max_columns, warnings);
    for (auto const& row : branch_table.rows) {
        Branch br;
        br.from_id = as_int(row.values[0], "branch from bus", row.line);
        br.to_id = as_int(row.values[1], "branch to bus", row.line);
        br.r = row.values[2];
        br.x = row.values[3];
        br.b = column(row, 4, 0.0);
        double ratio = column(row, 8, 0.0);
        br.tap = ratio == 0.0 ? 1.0 : ratio;
        br.shift = column(row, 9, 0.0) * deg_to_rad;
        br.in_service = column(row, 10, 1.0) > 0.0;
        for (int id : {br.from_id, br.to_id})
            if (!seen.contains(id))
                throw ValidationError("line " + std::to_string(row.line) + ": branch references unknown bus " +
                                      std::to_string(id));
        if (br.in_service && br.r == 0.0 && br.x == 0.0)
            throw ValidationError("line " + std::to_string(row.line) + ": in-service branch " +
                                  std::to_string(br.from_id) + "-" + std::to_string(br.to_id) +
                                  " has zero impedance");
        grid.branches.push_back(br);
    }

    if (auto it = scan.tables.find("gen"); it != scan.tables.end()) {
        check_width(it->second, "gen", 6, gen_max_columns, warnings);
        for (auto const& row : it->second.rows) {
            Generator g;
            g.bus_id = as_int(row.values[0], "generator bus", row.line);
            if (!seen.contains(g.bus_id))
                throw ValidationError("line " + std::to_string(row.line) + ": generator references unknown bus " +
                                      std::to_string(g.bus_id));
            g.pg = row.values[1] / base;
            g.qg = row.values[2] / base;
            g.vg = row.values[5];
            g.in_service = column(row, 7, 1.0) > 0.0;
            grid.gens.push_back(g);
        }
    }

    try {
        grid.finalize();
    } catch (ValidationError const& e) {
        throw ValidationError(std::string(e.what()) + " (bus table at line " + std::to_string(bus_table.line) +
                              ")");
    }
    return grid;
}

GridCase load_case_file(std::string const& path, std::vector<std::string>* warnings) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open case file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_case(buffer.str(), warnings);
}

}  // namespace psse
