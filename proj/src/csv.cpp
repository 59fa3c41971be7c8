#include "sivrelax/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace sivrelax {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw std::invalid_argument("CSV: missing column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

bool CsvTable::has_column(const std::string& name) const {
  return std::find(header.begin(), header.end(), name) != header.end();
}

double CsvTable::number(std::size_t row, std::size_t col) const {
  const std::string& cell = rows.at(row).at(col);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw std::invalid_argument("CSV: '" + cell + "' is not a number (row " +
                                std::to_string(row + 1) + ", column '" + header.at(col) + "')");
  }
  return v;
}

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    const std::string s = trim(line);
    if (s.empty() || s.front() == '#') continue;
    auto cells = split(s);
    if (!have_header) {
      t.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw std::invalid_argument("CSV: row " + std::to_string(t.rows.size() + 1) + " has " +
                                  std::to_string(cells.size()) + " cells, header has " +
                                  std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  if (!have_header) throw std::invalid_argument("CSV: no header line");
  return t;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  return read_csv(in);
}

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

CsvWriter::CsvWriter(std::ostream& out, const std::vector<std::string>& header,
                     const std::string& provenance)
    : out_(out), width_(header.size()) {
  if (!provenance.empty()) out_ << "# " << provenance << '\n';
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != width_) throw std::logic_error("CsvWriter: row width mismatch");
  for (std::size_t k = 0; k < cells.size(); ++k) out_ << (k ? "," : "") << cells[k];
  out_ << '\n';
}

void write_decay_csv(std::ostream& out, const DecayCurve& curve, const std::string& provenance) {
  curve.validate();
  std::vector<std::string> header{"time_s", "signal"};
  if (curve.has_sigma()) header.push_back("sigma");
  CsvWriter w(out, header, provenance);
  for (std::size_t k = 0; k < curve.times.size(); ++k) {
    std::vector<std::string> cells{format_number(curve.times[k]), format_number(curve.signal[k])};
    if (curve.has_sigma()) cells.push_back(format_number(curve.sigma[k]));
    w.row(cells);
  }
}

DecayCurve decay_from_table(const CsvTable& table) {
  DecayCurve c;
  const std::size_t ct = table.column("time_s");
  const std::size_t cs = table.column("signal");
  const bool sig = table.has_column("sigma");
  const std::size_t cg = sig ? table.column("sigma") : 0;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    c.times.push_back(table.number(r, ct));
    c.signal.push_back(table.number(r, cs));
    if (sig) c.sigma.push_back(table.number(r, cg));
  }
  c.validate();
  return c;
}

}  // namespace sivrelax
