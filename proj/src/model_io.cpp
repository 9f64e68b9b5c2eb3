#include "bnmiss/model_io.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace bnmiss {

namespace {

std::atomic<std::int64_t> g_dataset_reads{0};

struct Token {
  enum Kind { kWord, kPunct, kEnd } kind = kEnd;
  std::string text;
  int line = 1;
  int column = 1;
};

bool word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-' || c == '+';
}

bool valid_label(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  int line = 1;
  int column = 1;
  int last_line = 1;
  int last_column = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      last_line = line;
      last_column = column;
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
  };
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
    } else if (c == '/' && i + 1 < text.size() && text[i + 1] == '/') {
      while (i < text.size() && text[i] != '\n') advance(1);
    } else if (std::string_view("{}()[],;|:").find(c) != std::string_view::npos) {
      out.push_back({Token::kPunct, std::string(1, c), line, column});
      advance(1);
    } else if (word_char(c)) {
      Token t{Token::kWord, {}, line, column};
      const std::size_t start = i;
      while (i < text.size() && word_char(text[i])) advance(1);
      t.text = std::string(text.substr(start, i - start));
      out.push_back(std::move(t));
    } else {
      throw ParseError(line, column, std::string("unexpected character '") + c + "'");
    }
  }
  out.push_back({Token::kEnd, "", text.empty() ? 1 : last_line, text.empty() ? 1 : last_column});
  return out;
}

struct RawVariable {
  std::string name;
  std::vector<std::string> states;
  Token at;
};

struct RawRow {
  std::vector<std::string> labels;
  std::vector<double> values;
  Token at;
};

struct RawProbability {
  std::string child;
  std::vector<std::string> parents;
  std::vector<double> table;
  bool has_table = false;
  std::vector<RawRow> rows;
  Token at;
  Token close;
};

struct RawMechanism {
  std::string variable;
  std::vector<std::string> parents;
  std::vector<double> table;
  Token at;
  Token close;
};

struct RawDocument {
  std::string name = "unnamed";
  std::vector<RawVariable> variables;
  std::vector<RawProbability> probabilities;
  std::vector<RawMechanism> mechanisms;
  std::optional<std::vector<std::string>> informed;
  Token informed_at;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : tokens_(tokenize(text)) {}

  RawDocument parse() {
    RawDocument doc;
    while (peek().kind != Token::kEnd) {
      const Token& t = peek();
      if (t.kind != Token::kWord) fail(t, "expected a block keyword");
      if (t.text == "network") {
        next();
        doc.name = expect_word("network name").text;
        skip_block();
      } else if (t.text == "variable") {
        doc.variables.push_back(parse_variable());
      } else if (t.text == "probability") {
        doc.probabilities.push_back(parse_probability());
      } else if (t.text == "mechanism") {
        doc.mechanisms.push_back(parse_mechanism());
      } else if (t.text == "informed") {
        doc.informed_at = next();
        if (doc.informed) fail(doc.informed_at, "duplicate informed block");
        expect("{");
        doc.informed = label_list("}");
        expect("}");
      } else {
        fail(t, "unknown block '" + t.text + "'");
      }
      accept(";");
    }
    return doc;
  }

  [[noreturn]] static void fail(const Token& t, const std::string& message) {
    throw ParseError(t.line, t.column, message);
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& next() {
    const Token& t = tokens_[pos_];
    if (t.kind != Token::kEnd) ++pos_;
    return t;
  }
  bool accept(std::string_view punct) {
    if (peek().kind == Token::kPunct && peek().text == punct) {
      next();
      return true;
    }
    return false;
  }
  const Token& expect(std::string_view punct) {
    if (peek().kind != Token::kPunct || peek().text != punct)
      fail(peek(), "expected '" + std::string(punct) + "'" + found());
    return next();
  }
  const Token& expect_word(const std::string& what) {
    if (peek().kind != Token::kWord) fail(peek(), "expected " + what + found());
    return next();
  }
  void expect_keyword(std::string_view word) {
    if (peek().kind != Token::kWord || peek().text != word)
      fail(peek(), "expected '" + std::string(word) + "'" + found());
    next();
  }
  std::string found() const {
    return peek().kind == Token::kEnd ? " before end of input" : " but found '" + peek().text + "'";
  }
  std::string label() {
    const Token& t = expect_word("a name");
    if (!valid_label(t.text)) fail(t, "invalid name '" + t.text + "'");
    return t.text;
  }
  double number() {
    const Token& t = expect_word("a probability");
    char* end = nullptr;
    const double v = std::strtod(t.text.c_str(), &end);
    if (end != t.text.c_str() + t.text.size()) fail(t, "invalid number '" + t.text + "'");
    return v;
  }
  std::vector<std::string> label_list(std::string_view terminator) {
    std::vector<std::string> out;
    if (peek().kind == Token::kPunct && peek().text == terminator) return out;
    out.push_back(label());
    while (accept(",")) out.push_back(label());
    return out;
  }
  std::vector<double> number_list() {
    std::vector<double> out{number()};
    while (accept(",")) out.push_back(number());
    return out;
  }
  void skip_block() {
    const Token& open = expect("{");
    int depth = 1;
    while (depth > 0) {
      const Token& t = next();
      if (t.kind == Token::kEnd) fail(open, "unterminated block");
      if (t.kind == Token::kPunct && t.text == "{") ++depth;
      if (t.kind == Token::kPunct && t.text == "}") --depth;
    }
  }

  RawVariable parse_variable() {
    RawVariable v;
    v.at = next();
    v.name = label();
    expect("{");
    expect_keyword("type");
    expect_keyword("discrete");
    expect("[");
    const Token& k = expect_word("a state count");
    expect("]");
    expect("{");
    v.states = label_list("}");
    expect("}");
    expect(";");
    expect("}");
    char* end = nullptr;
    const long count = std::strtol(k.text.c_str(), &end, 10);
    if (end != k.text.c_str() + k.text.size() || count < 0) fail(k, "invalid state count '" + k.text + "'");
    if (static_cast<std::size_t>(count) != v.states.size())
      fail(k, "variable '" + v.name + "' declares " + k.text + " states but lists " +
                  std::to_string(v.states.size()));
    return v;
  }

  RawProbability parse_probability() {
    RawProbability p;
    p.at = next();
    expect("(");
    p.child = label();
    if (accept("|")) p.parents = label_list(")");
    expect(")");
    expect("{");
    while (!(peek().kind == Token::kPunct && peek().text == "}")) {
      if (peek().kind == Token::kWord && peek().text == "table") {
        const Token& t = next();
        if (p.has_table) fail(t, "duplicate table entry");
        p.has_table = true;
        p.table = number_list();
        expect(";");
      } else if (peek().kind == Token::kPunct && peek().text == "(") {
        RawRow row;
        row.at = next();
        row.labels = label_list(")");
        expect(")");
        accept(":");
        row.values = number_list();
        expect(";");
        p.rows.push_back(std::move(row));
      } else {
        fail(peek(), "expected a table entry" + found());
      }
    }
    p.close = expect("}");
    return p;
  }

  RawMechanism parse_mechanism() {
    RawMechanism m;
    m.at = next();
    m.variable = label();
    expect("{");
    bool has_table = false;
    while (!(peek().kind == Token::kPunct && peek().text == "}")) {
      const Token& t = expect_word("'parents' or 'table'");
      if (t.text == "parents") {
        m.parents = label_list(";");
      } else if (t.text == "table") {
        if (has_table) fail(t, "duplicate table entry");
        has_table = true;
        m.table = number_list();
      } else {
        fail(t, "unknown mechanism entry '" + t.text + "'");
      }
      expect(";");
    }
    m.close = expect("}");
    if (!has_table) fail(m.close, "mechanism '" + m.variable + "' has no table");
    return m;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

int resolve(const std::map<std::string, int>& ids, const std::string& name, const Token& at) {
  auto it = ids.find(name);
  if (it == ids.end()) Parser::fail(at, "unknown variable '" + name + "'");
  return it->second;
}

BayesianNetwork build_network(const RawDocument& doc) {
  std::map<std::string, int> ids;
  std::vector<Variable> variables;
  for (const auto& rv : doc.variables) {
    if (!ids.emplace(rv.name, static_cast<int>(variables.size())).second)
      Parser::fail(rv.at, "duplicate variable '" + rv.name + "'");
    variables.push_back({rv.name, rv.states});
  }
  const int n = static_cast<int>(variables.size());
  std::vector<std::vector<int>> parents(n);
  std::vector<Cpt> cpts(n);
  std::vector<const RawProbability*> blocks(n, nullptr);
  for (const auto& p : doc.probabilities) {
    const int v = resolve(ids, p.child, p.at);
    if (blocks[v]) Parser::fail(p.at, "duplicate probability block for '" + p.child + "'");
    blocks[v] = &p;
    for (const auto& name : p.parents) parents[v].push_back(resolve(ids, name, p.at));
  }
  for (int v = 0; v < n; ++v) {
    const RawProbability* p = blocks[v];
    if (!p) {
      const Token end = doc.variables[v].at;
      Parser::fail(end, "no probability block for variable '" + variables[v].name + "'");
    }
    const int k = variables[v].cardinality();
    std::size_t rows = 1;
    for (int q : parents[v]) rows *= static_cast<std::size_t>(variables[q].cardinality());
    Cpt cpt(static_cast<Eigen::Index>(rows), k);
    if (p->has_table) {
      if (!p->rows.empty()) Parser::fail(p->at, "probability block mixes table and row entries");
      if (!parents[v].empty()) Parser::fail(p->at, "table form is only allowed for root variables");
      if (static_cast<int>(p->table.size()) != k)
        Parser::fail(p->at, "table of '" + variables[v].name + "' needs " + std::to_string(k) + " values");
      for (int s = 0; s < k; ++s) cpt(0, s) = p->table[static_cast<std::size_t>(s)];
    } else {
      std::vector<char> seen(rows, 0);
      for (const auto& row : p->rows) {
        if (row.labels.size() != parents[v].size())
          Parser::fail(row.at, "row names " + std::to_string(row.labels.size()) + " parent states, expected " +
                                   std::to_string(parents[v].size()));
        std::size_t r = 0;
        for (std::size_t j = 0; j < row.labels.size(); ++j) {
          const Variable& pv = variables[parents[v][j]];
          const int s = pv.state_index(row.labels[j]);
          if (s < 0) Parser::fail(row.at, "unknown state '" + row.labels[j] + "' of '" + pv.name + "'");
          r = r * static_cast<std::size_t>(pv.cardinality()) + static_cast<std::size_t>(s);
        }
        if (seen[r]) Parser::fail(row.at, "duplicate row for '" + variables[v].name + "'");
        seen[r] = 1;
        if (static_cast<int>(row.values.size()) != k)
          Parser::fail(row.at, "row needs " + std::to_string(k) + " values");
        for (int s = 0; s < k; ++s) cpt(static_cast<Eigen::Index>(r), s) = row.values[static_cast<std::size_t>(s)];
      }
      for (std::size_t r = 0; r < rows; ++r) {
        if (seen[r]) continue;
        std::vector<int> states(parents[v].size());
        std::size_t rest = r;
        for (std::size_t j = parents[v].size(); j-- > 0;) {
          const int card = variables[parents[v][j]].cardinality();
          states[j] = static_cast<int>(rest % static_cast<std::size_t>(card));
          rest /= static_cast<std::size_t>(card);
        }
        std::string inst = "(";
        for (std::size_t j = 0; j < states.size(); ++j) {
          if (j) inst += ", ";
          inst += variables[parents[v][j]].states[static_cast<std::size_t>(states[j])];
        }
        inst += ")";
        Parser::fail(p->close, "missing row for parent instantiation " + inst + " of '" + variables[v].name + "'");
      }
    }
    cpts[v] = std::move(cpt);
  }
  BayesianNetwork network(doc.name, std::move(variables), std::move(parents), std::move(cpts));
  validate(network);
  return network;
}

std::string format_double(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.17g", v);
  return buffer;
}

void append_values(std::string& out, const auto& row) {
  for (Eigen::Index s = 0; s < row.size(); ++s) {
    if (s) out += ", ";
    out += format_double(row(s));
  }
}

std::vector<std::string_view> split_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    std::string_view cell = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    while (!cell.empty() && std::isspace(static_cast<unsigned char>(cell.front()))) cell.remove_prefix(1);
    while (!cell.empty() && std::isspace(static_cast<unsigned char>(cell.back()))) cell.remove_suffix(1);
    out.push_back(cell);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

}  // namespace

BayesianNetwork parse_network(std::string_view text) { return build_network(Parser(text).parse()); }

std::string serialize_network(const BayesianNetwork& network) {
  std::string out = "network " + (network.name().empty() ? std::string("unnamed") : network.name()) + " {\n}\n";
  for (int v = 0; v < network.size(); ++v) {
    const Variable& var = network.variable(v);
    out += "variable " + var.name + " {\n  type discrete [ " + std::to_string(var.cardinality()) + " ] { ";
    for (int s = 0; s < var.cardinality(); ++s) {
      if (s) out += ", ";
      out += var.states[static_cast<std::size_t>(s)];
    }
    out += " };\n}\n";
  }
  for (int v = 0; v < network.size(); ++v) {
    const auto& ps = network.parents(v);
    out += "probability ( " + network.variable(v).name;
    if (!ps.empty()) {
      out += " | ";
      for (std::size_t j = 0; j < ps.size(); ++j) {
        if (j) out += ", ";
        out += network.variable(ps[j]).name;
      }
    }
    out += " ) {\n";
    const Cpt& cpt = network.cpt(v);
    if (ps.empty()) {
      out += "  table ";
      append_values(out, cpt.row(0));
      out += ";\n";
    } else {
      std::vector<int> states(ps.size(), 0);
      for (Eigen::Index r = 0; r < cpt.rows(); ++r) {
        out += "  (";
        for (std::size_t j = 0; j < ps.size(); ++j) {
          if (j) out += ", ";
          out += network.variable(ps[j]).states[static_cast<std::size_t>(states[j])];
        }
        out += ") ";
        append_values(out, cpt.row(r));
        out += ";\n";
        for (std::size_t j = ps.size(); j-- > 0;) {
          if (++states[j] < network.cardinality(ps[j])) break;
          states[j] = 0;
        }
      }
    }
    out += "}\n";
  }
  return out;
}

IncompleteDataset read_dataset(std::string_view text, std::shared_ptr<const BayesianNetwork> network) {
  ++g_dataset_reads;
  if (!network) throw std::invalid_argument("read_dataset needs a network");
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  std::size_t first = 0;
  while (first < lines.size() && blank(lines[first])) ++first;
  if (first == lines.size()) throw ParseError(1, 1, "dataset has no header row");

  const auto header = split_line(lines[first]);
  std::vector<int> column_var(header.size());
  std::vector<char> present(static_cast<std::size_t>(network->size()), 0);
  for (std::size_t c = 0; c < header.size(); ++c) {
    const int v = network->index_of(header[c]);
    if (present[static_cast<std::size_t>(v)])
      throw ParseError(static_cast<int>(first) + 1, 1, "duplicate column '" + std::string(header[c]) + "'");
    present[static_cast<std::size_t>(v)] = 1;
    column_var[c] = v;
  }

  std::vector<std::string_view> body;
  for (std::size_t i = first + 1; i < lines.size(); ++i)
    if (!blank(lines[i])) body.push_back(lines[i]);

  IncompleteDataset::Cells cells = IncompleteDataset::Cells::Constant(
      static_cast<Eigen::Index>(body.size()), network->size(), kMissingCell);
  for (std::size_t r = 0; r < body.size(); ++r) {
    const auto fields = split_line(body[r]);
    if (fields.size() != header.size()) throw RaggedRow(static_cast<std::int64_t>(r));
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (fields[c] == "?") continue;
      const Variable& var = network->variable(column_var[c]);
      const int s = var.state_index(fields[c]);
      if (s < 0) throw UnknownStateLabel(static_cast<std::int64_t>(r), var.name, std::string(fields[c]));
      cells(static_cast<Eigen::Index>(r), column_var[c]) = s;
    }
  }
  IncompleteDataset dataset(std::move(network), std::move(cells));
  return dataset;
}

std::string write_dataset(const IncompleteDataset& dataset) {
  const BayesianNetwork& network = dataset.network();
  std::string out;
  for (int v = 0; v < network.size(); ++v) {
    if (v) out += ',';
    out += network.variable(v).name;
  }
  out += '\n';
  for (std::int64_t r = 0; r < dataset.rows(); ++r) {
    for (int v = 0; v < network.size(); ++v) {
      if (v) out += ',';
      const int s = dataset(r, v);
      out += s == kMissingCell ? std::string("?") : network.variable(v).states[static_cast<std::size_t>(s)];
    }
    out += '\n';
  }
  return out;
}

std::int64_t dataset_read_count() { return g_dataset_reads.load(); }

MissingnessGraph parse_missingness_graph(std::string_view text) {
  const RawDocument doc = Parser(text).parse();
  auto network = std::make_shared<const BayesianNetwork>(build_network(doc));
  std::map<std::string, int> ids;
  for (int v = 0; v < network->size(); ++v) ids.emplace(network->variable(v).name, v);

  std::vector<MechanismSpec> mechanisms;
  std::vector<char> seen(static_cast<std::size_t>(network->size()), 0);
  for (const auto& raw : doc.mechanisms) {
    MechanismSpec spec;
    spec.variable = resolve(ids, raw.variable, raw.at);
    if (seen[static_cast<std::size_t>(spec.variable)]) Parser::fail(raw.at, "duplicate mechanism for '" + raw.variable + "'");
    seen[static_cast<std::size_t>(spec.variable)] = 1;
    std::size_t rows = 1;
    for (const auto& name : raw.parents) {
      const int p = resolve(ids, name, raw.at);
      spec.parents.push_back(p);
      rows *= static_cast<std::size_t>(network->cardinality(p));
    }
    if (raw.table.size() != 2 * rows)
      Parser::fail(raw.close, "mechanism '" + raw.variable + "' needs " + std::to_string(2 * rows) + " values");
    spec.table.resize(static_cast<Eigen::Index>(rows), 2);
    for (std::size_t r = 0; r < rows; ++r) {
      spec.table(static_cast<Eigen::Index>(r), 0) = raw.table[2 * r];
      spec.table(static_cast<Eigen::Index>(r), 1) = raw.table[2 * r + 1];
    }
    mechanisms.push_back(std::move(spec));
  }
  std::optional<std::vector<int>> informed;
  if (doc.informed) {
    informed.emplace();
    for (const auto& name : *doc.informed) informed->push_back(resolve(ids, name, doc.informed_at));
  }
  MissingnessGraph graph(std::move(network), std::move(mechanisms), std::move(informed));
  validate(graph);
  return graph;
}

std::string serialize_missingness_graph(const MissingnessGraph& graph) {
  const BayesianNetwork& network = graph.network();
  std::string out = serialize_network(network);
  for (const auto& m : graph.mechanisms()) {
    out += "mechanism " + network.variable(m.variable).name + " {\n";
    if (!m.parents.empty()) {
      out += "  parents ";
      for (std::size_t j = 0; j < m.parents.size(); ++j) {
        if (j) out += ", ";
        out += network.variable(m.parents[j]).name;
      }
      out += ";\n";
    }
    out += "  table ";
    for (Eigen::Index r = 0; r < m.table.rows(); ++r) {
      if (r) out += ", ";
      out += format_double(m.table(r, 0)) + ", " + format_double(m.table(r, 1));
    }
    out += ";\n}\n";
  }
  if (graph.informed()) {
    out += "informed { ";
    const auto& w = *graph.informed();
    for (std::size_t j = 0; j < w.size(); ++j) {
      if (j) out += ", ";
      out += network.variable(w[j]).name;
    }
    out += " }\n";
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << contents;
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

}  // namespace bnmiss
