#pragma once

// Plain-text formats: CSV for data, 17 significant digits so values
// round-trip exactly.

#include <cstddef>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hypstab/embedding.hpp"
#include "hypstab/geometry.hpp"
#include "hypstab/svm.hpp"
#include "hypstab/tree.hpp"

namespace hypstab {

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

namespace io {

inline std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double to_double(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError("line " + std::to_string(line) + ": not a number: '" + s + "'");
  }
}

inline long to_long(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const long v = std::stol(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError("line " + std::to_string(line) + ": not an integer: '" + s + "'");
  }
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  return f;
}

/// Chart name used in "# chart=" comments; the CLI spells the third chart eparam.
inline std::string_view csv_chart_name(Chart c) { return c == Chart::param ? "param" : to_string(c); }

inline std::ifstream open_in(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open '" + path + "' for reading");
  return f;
}

/// Rows of a CSV with '#' comments collected separately. The first
/// non-comment line is the header.
struct CsvTable {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;

  std::string comment_value(const std::string& key) const {
    for (const auto& c : comments) {
      const auto pos = c.find(key + "=");
      if (pos != std::string::npos) {
        std::string v = c.substr(pos + key.size() + 1);
        const auto end = v.find_first_of(" \t\r");
        return end == std::string::npos ? v : v.substr(0, end);
      }
    }
    return {};
  }
};

inline CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      t.comments.push_back(line.substr(1));
      continue;
    }
    auto cells = split_csv(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw IoError("line " + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) +
                    " columns, got " + std::to_string(cells.size()));
    }
    t.rows.push_back(std::move(cells));
    t.line_numbers.push_back(lineno);
  }
  if (t.header.empty()) throw IoError("CSV has no header row");
  return t;
}

}  // namespace io

// ---------------------------------------------------------------------------
// trees: node,parent,x,y with parent -1 for the root

inline void write_tree_csv(std::ostream& out, const TreeInstance& t) {
  t.validate();
  const auto adj = adjacency(t.nodes, t.edges);
  std::vector<long> parent(t.nodes, -2);
  std::vector<std::size_t> stack{0};
  parent[0] = -1;
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    for (std::size_t v : adj[u]) {
      if (parent[v] == -2) {
        parent[v] = static_cast<long>(u);
        stack.push_back(v);
      }
    }
  }
  out << "# tree=" << t.name << "\n";
  out << "node,parent,x,y\n";
  for (std::size_t i = 0; i < t.nodes; ++i) {
    const Point2 p = t.layout.empty() ? Point2{0.0, 0.0} : t.layout[i];
    out << i << ',' << parent[i] << ',' << io::fmt(p[0]) << ',' << io::fmt(p[1]) << '\n';
  }
}

/// Reads a tree and re-normalizes its layout into the unit square.
inline TreeInstance read_tree_csv(std::istream& in) {
  const io::CsvTable t = io::read_csv(in);
  if (t.header != std::vector<std::string>{"node", "parent", "x", "y"}) {
    throw IoError("tree CSV header must be node,parent,x,y");
  }
  TreeInstance tree;
  tree.nodes = t.rows.size();
  tree.layout.resize(tree.nodes);
  std::vector<bool> seen(tree.nodes, false);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::size_t line = t.line_numbers[r];
    const long node = io::to_long(t.rows[r][0], line);
    const long parent = io::to_long(t.rows[r][1], line);
    if (node < 0 || static_cast<std::size_t>(node) >= tree.nodes || seen[static_cast<std::size_t>(node)]) {
      throw IoError("line " + std::to_string(line) + ": node ids must be a permutation of 0..n-1");
    }
    seen[static_cast<std::size_t>(node)] = true;
    if (parent >= 0) tree.edges.emplace_back(static_cast<std::size_t>(parent), static_cast<std::size_t>(node));
    tree.layout[static_cast<std::size_t>(node)] = {io::to_double(t.rows[r][2], line), io::to_double(t.rows[r][3], line)};
  }
  tree.name = t.comment_value("tree");
  if (tree.name.empty()) tree.name = "file";
  try {
    tree.validate();
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("invalid tree: ") + e.what());
  }
  tree.layout = normalize_layout(tree.layout);
  return tree;
}

// ---------------------------------------------------------------------------
// point sets: "# chart=<name>", header node,c0,c1,...

inline void write_points_csv(std::ostream& out, Chart chart, const std::vector<Vector>& pts) {
  out << "# chart=" << io::csv_chart_name(chart) << "\n";
  out << "node";
  const std::size_t dim = pts.empty() ? 0 : pts.front().size();
  for (std::size_t j = 0; j < dim; ++j) out << ",c" << j;
  out << '\n';
  for (std::size_t i = 0; i < pts.size(); ++i) {
    out << i;
    for (double v : pts[i]) out << ',' << io::fmt(v);
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// labelled datasets: "# chart=<name>", header x1..xn,label. Poincare and
// eparam files carry n features; lorentz files carry the n+1 ambient ones.

inline void write_dataset_csv(std::ostream& out, const LabeledDataset& d, Chart chart = Chart::poincare) {
  d.validate();
  out << "# chart=" << io::csv_chart_name(chart) << " classes=" << d.classes << "\n";
  const std::size_t n = chart == Chart::lorentz ? d.dim() + 1 : d.dim();
  for (std::size_t j = 0; j < n; ++j) out << 'x' << j << ',';
  out << "label\n";
  for (std::size_t i = 0; i < d.size(); ++i) {
    Vector f;
    switch (chart) {
      case Chart::poincare: f = lorentz_to_poincare(d.points[i]).vec(); break;
      case Chart::lorentz: f = d.points[i].ambient(); break;
      case Chart::param: f = param_from_lorentz(d.points[i]).z; break;
    }
    for (double v : f) out << io::fmt(v) << ',';
    out << d.labels[i] << '\n';
  }
}

inline LabeledDataset read_dataset_csv(std::istream& in) {
  const io::CsvTable t = io::read_csv(in);
  if (t.header.size() < 2 || t.header.back() != "label") throw IoError("dataset CSV must end with a label column");
  const std::string chart_name = t.comment_value("chart");
  Chart chart = Chart::poincare;
  if (!chart_name.empty()) {
    try {
      chart = chart_from_string(chart_name);
    } catch (const std::invalid_argument& e) {
      throw IoError(e.what());
    }
  }
  const std::size_t nf = t.header.size() - 1;
  if (chart == Chart::lorentz && nf < 2) throw IoError("lorentz dataset needs at least 2 feature columns");
  LabeledDataset d;
  int max_label = -1;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::size_t line = t.line_numbers[r];
    Vector f(nf);
    for (std::size_t j = 0; j < nf; ++j) f[j] = io::to_double(t.rows[r][j], line);
    const long label = io::to_long(t.rows[r][nf], line);
    if (label < 0) throw IoError("line " + std::to_string(line) + ": labels must be >= 0");
    try {
      switch (chart) {
        case Chart::poincare: d.points.push_back(poincare_to_lorentz(PoincarePoint(f))); break;
        case Chart::lorentz: d.points.push_back(LorentzPoint::from_ambient(f)); break;
        case Chart::param: d.points.push_back(param_to_lorentz(EuclideanParam{f})); break;
      }
    } catch (const std::exception& e) {
      throw IoError("line " + std::to_string(line) + ": " + e.what());
    }
    d.labels.push_back(static_cast<int>(label));
    max_label = std::max(max_label, static_cast<int>(label));
  }
  if (d.points.empty()) throw IoError("dataset CSV has no rows");
  const std::string classes = t.comment_value("classes");
  d.classes = classes.empty() ? max_label + 1 : static_cast<int>(io::to_long(classes, 1));
  try {
    d.validate();
  } catch (const std::invalid_argument& e) {
    throw IoError(e.what());
  }
  return d;
}

}  // namespace hypstab
