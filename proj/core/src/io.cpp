#include "ivfts/io.hpp"

#include "ivfts/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unistd.h>

namespace ivfts {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  const std::string t = trim(text);
  double value = 0.0;
  const char* first = t.data();
  if (!t.empty() && t.front() == '+') ++first;
  const auto res = std::from_chars(first, t.data() + t.size(), value);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
    throw Error("not a number: '" + t + "'");
  return value;
}

std::vector<std::string> split(std::string_view text, char delimiter) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(delimiter, start);
    out.emplace_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(first, last - first + 1));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error("cannot replace " + path.string() + ": " + ec.message());
  }
}

std::string file_token(std::string_view label) {
  std::string out;
  for (char c : label)
    out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? static_cast<char>(std::tolower(static_cast<unsigned char>(c))) : '_');
  return out;
}

namespace {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;  // line number, fields
};

CsvTable read_table(const std::filesystem::path& path, const std::vector<std::string>& required) {
  if (!std::filesystem::exists(path)) throw Error("input file not found: " + path.string());
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  CsvTable table;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty() || line.front() == '#') continue;
    auto fields = split(line, ',');
    for (auto& f : fields) f = trim(f);
    if (table.header.empty()) {
      table.header = fields;
      continue;
    }
    if (fields.size() != table.header.size())
      throw Error(path.string() + ":" + std::to_string(number) + ": expected " +
                  std::to_string(table.header.size()) + " fields, found " + std::to_string(fields.size()));
    table.rows.emplace_back(number, std::move(fields));
  }
  if (table.header.empty()) throw Error(path.string() + ": missing header row");
  for (std::size_t i = 0; i < required.size(); ++i)
    if (i >= table.header.size() || table.header[i] != required[i])
      throw Error(path.string() + ":1: header must start with " + [&] {
        std::string s;
        for (const auto& r : required) s += (s.empty() ? "" : ",") + r;
        return s;
      }());
  return table;
}

double field_number(const std::filesystem::path& path, std::size_t line, const std::string& name,
                    const std::string& text) {
  try {
    return parse_double(text);
  } catch (const Error&) {
    throw Error(path.string() + ":" + std::to_string(line) + ": " + name + " is not a number: '" + text + "'");
  }
}

}  // namespace

IvData ingest_iv_csv(const std::filesystem::path& path, const std::vector<std::string>& maturities) {
  const CsvTable table = read_table(path, {"date", "maturity", "delta", "iv"});
  require(table.header.size() == 4, path.string() + ":1: expected exactly the columns date,maturity,delta,iv");

  std::vector<std::string> order;
  std::set<std::string> wanted(maturities.begin(), maturities.end());
  std::set<double> deltas;
  // (date, maturity) -> delta -> iv
  std::map<std::string, std::map<std::string, std::map<double, double>>> cells;
  for (const auto& [line, f] : table.rows) {
    const std::string where = path.string() + ":" + std::to_string(line) + ": ";
    if (f[0].empty()) throw Error(where + "empty date");
    if (f[1].empty()) throw Error(where + "empty maturity");
    const double delta = field_number(path, line, "delta", f[2]);
    const double iv = field_number(path, line, "iv", f[3]);
    if (!std::isfinite(delta)) throw Error(where + "delta is not finite");
    if (!(iv > 0.0) || !std::isfinite(iv)) throw Error(where + "iv must be positive and finite");
    if (!wanted.empty() && !wanted.count(f[1])) continue;
    if (std::find(order.begin(), order.end(), f[1]) == order.end()) order.push_back(f[1]);
    deltas.insert(delta);
    if (!cells[f[0]][f[1]].emplace(delta, iv).second)
      throw Error(where + "duplicate quote for " + f[0] + " " + f[1] + " delta " + f[2]);
  }
  if (!maturities.empty()) {
    for (const auto& m : maturities)
      if (std::find(order.begin(), order.end(), m) == order.end())
        throw Error(path.string() + ": no quotes for maturity '" + m + "'");
    order = maturities;
  }
  require(!order.empty(), path.string() + ": no quotes");
  require(deltas.size() >= 2, path.string() + ": need at least two distinct deltas");

  const std::vector<double> grid_points(deltas.begin(), deltas.end());
  std::vector<std::string> dates;
  std::size_t dropped = 0;
  for (const auto& [date, by_maturity] : cells) {
    bool complete = by_maturity.size() == order.size();
    for (const auto& m : order) {
      const auto it = by_maturity.find(m);
      complete = complete && it != by_maturity.end() && it->second.size() == grid_points.size();
    }
    if (complete)
      dates.push_back(date);
    else
      ++dropped;
  }
  if (dates.size() < 30)
    throw Error(path.string() + ": only " + std::to_string(dates.size()) + " complete days, at least 30 are needed");

  const DeltaGrid grid(grid_points);
  std::vector<CurvePanel> panels;
  for (const auto& m : order) {
    Matrix values(static_cast<Eigen::Index>(dates.size()), static_cast<Eigen::Index>(grid_points.size()));
    for (std::size_t i = 0; i < dates.size(); ++i) {
      const auto& row = cells.at(dates[i]).at(m);
      Eigen::Index k = 0;
      for (const auto& [delta, iv] : row) values(static_cast<Eigen::Index>(i), k++) = iv;
    }
    panels.emplace_back(grid, dates, std::move(values), m);
  }
  return {PanelSet(std::move(panels)), dropped};
}

std::string iv_csv(const PanelSet& set) {
  std::string out = "date,maturity,delta,iv\n";
  const auto& points = set.grid().points();
  for (std::size_t i = 0; i < set.rows(); ++i)
    for (const auto& panel : set)
      for (std::size_t k = 0; k < points.size(); ++k) {
        out += set.dates()[i];
        out += ',';
        out += panel.maturity();
        out += ',';
        out += format_double(points[k]);
        out += ',';
        out += format_double(panel.values()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)));
        out += '\n';
      }
  return out;
}

MarketSeries read_market_csv(const std::filesystem::path& path) {
  const CsvTable table = read_table(path, {"date", "spot", "r_domestic", "r_foreign"});
  MarketSeries market;
  for (const auto& [line, f] : table.rows) {
    market.dates.push_back(f[0]);
    market.spot.push_back(field_number(path, line, "spot", f[1]));
    market.domestic_rate.push_back(field_number(path, line, "r_domestic", f[2]));
    market.foreign_rate.push_back(field_number(path, line, "r_foreign", f[3]));
  }
  try {
    market.validate();
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
  return market;
}

std::string market_csv(const MarketSeries& market) {
  std::string out = "date,spot,r_domestic,r_foreign\n";
  for (std::size_t i = 0; i < market.dates.size(); ++i)
    out += market.dates[i] + "," + format_double(market.spot[i]) + "," + format_double(market.domestic_rate[i]) +
           "," + format_double(market.foreign_rate[i]) + "\n";
  return out;
}

std::string loss_csv(const LossMatrix& losses) {
  std::string out = "target_date";
  for (const auto& id : losses.model_ids) out += "," + id;
  out += '\n';
  for (Eigen::Index r = 0; r < losses.values.rows(); ++r) {
    out += static_cast<std::size_t>(r) < losses.target_dates.size() ? losses.target_dates[static_cast<std::size_t>(r)]
                                                                      : std::to_string(r + 1);
    for (Eigen::Index c = 0; c < losses.values.cols(); ++c) out += "," + format_double(losses.values(r, c));
    out += '\n';
  }
  return out;
}

LossMatrix read_loss_csv(const std::filesystem::path& path) {
  const CsvTable table = read_table(path, {"target_date"});
  require(table.header.size() >= 3, path.string() + ":1: a loss matrix needs at least two model columns");
  LossMatrix losses;
  losses.model_ids.assign(table.header.begin() + 1, table.header.end());
  losses.values = Matrix(static_cast<Eigen::Index>(table.rows.size()),
                         static_cast<Eigen::Index>(losses.model_ids.size()));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& [line, f] = table.rows[r];
    losses.target_dates.push_back(f[0]);
    for (std::size_t c = 1; c < f.size(); ++c) {
      const double v = field_number(path, line, table.header[c], f[c]);
      if (!(v >= 0.0) || !std::isfinite(v))
        throw Error(path.string() + ":" + std::to_string(line) + ": losses must be finite and non-negative");
      losses.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c - 1)) = v;
    }
  }
  return losses;
}

}  // namespace ivfts
