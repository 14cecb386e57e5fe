#include "phasesense/io.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <sstream>
#include <thread>

namespace phasesense::io {

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& columns)
    : out_(path), columns_(columns.size()) {
    if (!out_) throw std::runtime_error("cannot open output file: " + path);
    for (std::size_t i = 0; i < columns.size(); ++i)
        out_ << columns[i] << (i + 1 < columns.size() ? "," : "\n");
}

void CsvWriter::row(const std::vector<std::string>& labels, const std::vector<double>& values) {
    if (labels.size() + values.size() != columns_)
        throw std::invalid_argument("CsvWriter: row width mismatch");
    std::size_t written = 0;
    for (const std::string& l : labels)
        out_ << l << (++written < columns_ ? "," : "\n");
    for (double v : values)
        out_ << format_double(v) << (++written < columns_ ? "," : "\n");
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

int CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return static_cast<int>(i);
    throw std::invalid_argument("csv column not found: " + name);
}

double CsvTable::value(std::size_t row, const std::string& name) const {
    return std::stod(rows.at(row).at(static_cast<std::size_t>(column(name))));
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open input file: " + path);
    CsvTable table;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (header) {
            table.columns = std::move(cells);
            header = false;
        } else {
            table.rows.push_back(std::move(cells));
        }
    }
    return table;
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ':')) parts.push_back(part);
    if (parts.size() < 3 || parts.size() > 4)
        throw std::invalid_argument("grid must be lo:hi:count[:log], got '" + text + "'");
    const double lo = std::stod(parts[0]);
    const double hi = std::stod(parts[1]);
    const int count = std::stoi(parts[2]);
    const bool log_grid = parts.size() == 4 && parts[3] == "log";
    if (count < 1 || hi < lo) throw std::invalid_argument("grid bounds out of order");
    if (log_grid && lo <= 0.0) throw std::invalid_argument("log grid needs lo > 0");
    std::vector<double> grid(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const double f = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
        grid[static_cast<std::size_t>(i)] =
            log_grid ? lo * std::pow(hi / lo, f) : lo + f * (hi - lo);
    }
    return grid;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) out.push_back(std::stod(part));
    return out;
}

namespace {

std::pair<std::string, std::string> split_once(const std::string& text, char sep) {
    const auto pos = text.find(sep);
    if (pos == std::string::npos) return {text, ""};
    return {text.substr(0, pos), text.substr(pos + 1)};
}

}  // namespace

ParsedState parse_state(const std::string& text) {
    ParsedState out;
    out.label = text;
    auto [name, args] = split_once(text, ':');
    if (name == "vacuum") {
        out.spec.family = zoo::Family::Fock;
        out.spec.fock_n = 0;
        return out;
    }
    out.spec.family = zoo::family_from_name(name);

    std::vector<std::string> parts;
    std::stringstream ss(args);
    std::string part;
    while (std::getline(ss, part, ',')) parts.push_back(part);

    std::vector<double> positional;
    for (const std::string& p : parts) {
        const auto [key, value] = split_once(p, '=');
        if (value.empty()) {
            positional.push_back(std::stod(key));
            continue;
        }
        const double v = std::stod(value);
        if (key == "n") {
            if (out.spec.family == zoo::Family::Fock)
                out.spec.fock_n = static_cast<int>(std::lround(v));
            else if (out.spec.family == zoo::Family::GaussianSqueezed)
                out.spec.mean_target = v;
            else if (out.spec.family == zoo::Family::FockSuperposition)
                out.spec.fock_n = static_cast<int>(std::lround(v));
            else
                out.target_n = v;
        } else if (key == "n2")
            out.spec.fock_n2 = static_cast<int>(std::lround(v));
        else if (key == "amp" || key == "amplitude")
            out.spec.amplitude = v;
        else if (key == "delta")
            out.spec.delta = v;
        else if (key == "mu")
            out.spec.mu = v;
        else if (key == "spacing")
            out.spec.spacing = static_cast<int>(std::lround(v));
        else if (key == "offset")
            out.spec.offset = static_cast<int>(std::lround(v));
        else if (key == "parity")
            out.spec.parity_sign = v < 0 ? -1 : 1;
        else if (key == "mean")
            out.spec.mean_target = v;
        else
            throw std::invalid_argument("unknown state parameter '" + key + "' in " + text);
    }

    // Positional shorthand per family.
    if (!positional.empty()) {
        switch (out.spec.family) {
            case zoo::Family::Fock:
                out.spec.fock_n = static_cast<int>(std::lround(positional[0]));
                break;
            case zoo::Family::GaussianSqueezed: out.spec.mean_target = positional[0]; break;
            case zoo::Family::GKP: out.spec.delta = positional[0]; break;
            case zoo::Family::FockSuperposition:
                if (positional.size() != 2)
                    throw std::invalid_argument("fock superposition needs two indices");
                out.spec.fock_n = static_cast<int>(std::lround(positional[0]));
                out.spec.fock_n2 = static_cast<int>(std::lround(positional[1]));
                break;
            default: out.target_n = positional[0]; break;
        }
    }
    return out;
}

zoo::StateSpec resolve_state(const ParsedState& parsed, double tol) {
    if (!parsed.target_n) return parsed.spec;
    zoo::StateSpec base = parsed.spec;
    // The solver needs a valid starting member to size against.
    if ((base.family == zoo::Family::Cat || base.family == zoo::Family::Moon ||
         base.family == zoo::Family::Compass) &&
        base.amplitude <= 0.0)
        base.amplitude = 1.0;
    if (base.family == zoo::Family::NumberPhase && base.mu <= 0.0) base.mu = 1.0;
    if (base.family == zoo::Family::GKP && base.delta == 0.0) base.delta = 1.0;
    return zoo::solve_for_occupation(base, *parsed.target_n, tol);
}

void parallel_for(int count, const std::function<void(int)>& body) {
    const int workers = std::min<int>(count, std::max(1u, std::thread::hardware_concurrency()));
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (std::thread& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace phasesense::io
