#include "afape/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace afape {

using nlohmann::json;

std::string format_double(double v) {
  // Round-trippable shortest form: try increasing precision until the value
  // parses back exactly.
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    double back = 0;
    std::sscanf(buf, "%lf", &back);
    if (back == v) return buf;
  }
  return buf;
}

static std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

void write_dataset_csv(const Dataset& data, std::ostream& os) {
  const int d = data.map.num_sub();
  const int K = data.map.num_super();
  os << "id,t";
  for (int j = 0; j < d; ++j) os << ",x" << j;
  for (int k = 0; k < K; ++k) os << ",a" << k;
  os << ",y\n";
  for (const auto& r : data.records) {
    for (int t = 0; t <= data.steps; ++t) {
      os << r.id << ',' << t;
      for (int j = 0; j < d; ++j) {
        os << ',';
        if (r.observed.observed(t, j)) os << format_double(*r.observed.cell(t, j));
      }
      for (int k = 0; k < K; ++k) {
        os << ',';
        if (t >= 1) os << (r.masks[t - 1].bit(k) ? '1' : '0');
      }
      os << ',';
      if (t >= 1) os << int(r.labels[t - 1]);
      os << '\n';
    }
  }
}

void write_dataset_csv(const Dataset& data, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open for writing: " + path);
  write_dataset_csv(data, f);
}

Dataset read_dataset_csv(std::istream& is, const SuperfeatureMap& map) {
  const int d = map.num_sub();
  const int K = map.num_super();
  std::string line;
  if (!std::getline(is, line)) throw InvalidInput("dataset csv: empty stream");

  struct Row {
    int t;
    std::vector<std::optional<double>> x;
    StepMask a;
    int y;
  };
  std::map<long long, std::vector<Row>> by_id;
  std::vector<long long> id_order;

  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto f = split_csv_line(line);
    if (static_cast<int>(f.size()) != 2 + d + K + 1)
      throw InvalidInput("dataset csv: bad column count");
    Row row;
    const long long id = std::stoll(f[0]);
    row.t = std::stoi(f[1]);
    row.x.resize(d);
    for (int j = 0; j < d; ++j)
      if (!f[2 + j].empty()) row.x[j] = std::stod(f[2 + j]);
    row.a = StepMask::zeros(K);
    for (int k = 0; k < K; ++k) {
      const std::string& s = f[2 + d + k];
      if (!s.empty()) row.a.set_bit(k, s == "1");
    }
    row.y = f[2 + d + K].empty() ? -1 : std::stoi(f[2 + d + K]);
    if (by_id.find(id) == by_id.end()) id_order.push_back(id);
    by_id[id].push_back(row);
  }

  Dataset out;
  out.map = map;
  int T = -1;
  for (long long id : id_order) {
    auto& rows = by_id[id];
    int tmax = 0;
    for (const auto& r : rows) tmax = std::max(tmax, r.t);
    if (T < 0) T = tmax;
    if (tmax != T) throw InvalidInput("dataset csv: inconsistent horizon");
    Record rec;
    rec.id = id;
    rec.observed = ObservedPanel(T, d);
    rec.masks.assign(T, StepMask::zeros(K));
    rec.labels.assign(T, 0);
    for (const auto& r : rows) {
      for (int j = 0; j < d; ++j)
        if (r.x[j]) rec.observed.set(r.t, j, *r.x[j]);
      if (r.t >= 1) {
        rec.masks[r.t - 1] = r.a;
        rec.labels[r.t - 1] = static_cast<std::uint8_t>(r.y == 1);
      }
    }
    out.records.push_back(std::move(rec));
  }
  out.steps = std::max(T, 0);
  return out;
}

Dataset read_dataset_csv(const std::string& path, const SuperfeatureMap& map) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open for reading: " + path);
  return read_dataset_csv(f, map);
}

void write_dataset_jsonl(const Dataset& data, std::ostream& os) {
  const int d = data.map.num_sub();
  const int K = data.map.num_super();
  for (const auto& r : data.records) {
    json j;
    j["id"] = r.id;
    json x = json::array();
    for (int t = 0; t <= data.steps; ++t) {
      json row = json::array();
      for (int c = 0; c < d; ++c) {
        if (r.observed.observed(t, c))
          row.push_back(*r.observed.cell(t, c));
        else
          row.push_back(nullptr);
      }
      x.push_back(row);
    }
    j["x"] = x;
    json a = json::array();
    for (int t = 1; t <= data.steps; ++t) {
      json row = json::array();
      for (int k = 0; k < K; ++k) row.push_back(r.masks[t - 1].bit(k) ? 1 : 0);
      a.push_back(row);
    }
    j["a"] = a;
    json y = json::array();
    for (int t = 1; t <= data.steps; ++t) y.push_back(int(r.labels[t - 1]));
    j["y"] = y;
    os << j.dump() << '\n';
  }
}

void write_dataset_jsonl(const Dataset& data, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open for writing: " + path);
  write_dataset_jsonl(data, f);
}

Dataset read_dataset_jsonl(std::istream& is, const SuperfeatureMap& map) {
  const int d = map.num_sub();
  const int K = map.num_super();
  Dataset out;
  out.map = map;
  std::string line;
  int T = -1;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    Record rec;
    rec.id = j.at("id").get<long long>();
    const auto& x = j.at("x");
    const int steps = static_cast<int>(x.size()) - 1;
    if (T < 0) T = steps;
    if (steps != T) throw InvalidInput("dataset jsonl: inconsistent horizon");
    rec.observed = ObservedPanel(T, d);
    for (int t = 0; t <= T; ++t)
      for (int c = 0; c < d; ++c)
        if (!x[t][c].is_null()) rec.observed.set(t, c, x[t][c].get<double>());
    rec.masks.assign(T, StepMask::zeros(K));
    const auto& a = j.at("a");
    for (int t = 1; t <= T; ++t)
      for (int k = 0; k < K; ++k)
        rec.masks[t - 1].set_bit(k, a[t - 1][k].get<int>() == 1);
    rec.labels.assign(T, 0);
    const auto& y = j.at("y");
    for (int t = 1; t <= T; ++t)
      rec.labels[t - 1] = static_cast<std::uint8_t>(y[t - 1].get<int>() == 1);
    out.records.push_back(std::move(rec));
  }
  out.steps = std::max(T, 0);
  return out;
}

Dataset read_dataset_jsonl(const std::string& path, const SuperfeatureMap& map) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open for reading: " + path);
  return read_dataset_jsonl(f, map);
}

}  // namespace afape
