// Line-based DBDST / DBGST instance files.

#include <algorithm>
#include <charconv>
#include <sstream>

#include "dbnd/error.hpp"
#include "dbnd/instances.hpp"

namespace dbnd {

namespace {

class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  // Next non-empty line split into whitespace-separated tokens.
  std::vector<std::string_view> next(const char* expecting) {
    while (pos_ < text_.size()) {
      std::size_t end = text_.find('\n', pos_);
      if (end == std::string_view::npos) end = text_.size();
      std::string_view line = text_.substr(pos_, end - pos_);
      pos_ = end + 1;
      ++line_no_;
      auto tokens = split(line);
      if (!tokens.empty()) return tokens;
    }
    fail(ErrorCode::kIo, std::string("unexpected end of file, expecting ") + expecting);
  }

  bool at_end() {
    while (pos_ < text_.size()) {
      std::size_t end = text_.find('\n', pos_);
      if (end == std::string_view::npos) end = text_.size();
      if (!split(text_.substr(pos_, end - pos_)).empty()) return false;
      pos_ = end + 1;
      ++line_no_;
    }
    return true;
  }

  [[noreturn]] void malformed(const std::string& what) const {
    fail(ErrorCode::kIo, "malformed line " + std::to_string(line_no_) + ": " + what);
  }

  template <typename T>
  T number(std::string_view tok) const {
    T value{};
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) malformed("bad number '" + std::string(tok) + "'");
    return value;
  }

  void expect(const std::vector<std::string_view>& tokens, std::string_view keyword, std::size_t count) const {
    if (tokens.empty() || tokens[0] != keyword || tokens.size() != count)
      malformed("expected '" + std::string(keyword) + "' with " + std::to_string(count - 1) + " fields");
  }

 private:
  static std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
      if (j > i) out.push_back(line.substr(i, j - i));
      i = j;
    }
    return out;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
};

void id_in_range(std::int64_t id, std::int64_t n, const char* what) {
  if (id < 0 || id >= n) fail(ErrorCode::kIo, std::string(what) + " id out of range: " + std::to_string(id));
}

}  // namespace

DirectedInstance parse_dst(std::string_view text) {
  LineReader in(text);
  auto tok = in.next("header");
  if (tok.size() != 2 || tok[0] != "DBDST" || tok[1] != "1") in.malformed("expected 'DBDST 1'");
  tok = in.next("sizes");
  if (tok.size() != 3) in.malformed("expected 'n m k'");
  const auto n = in.number<std::int32_t>(tok[0]);
  const auto m = in.number<std::int32_t>(tok[1]);
  const auto k = in.number<std::int32_t>(tok[2]);
  if (n <= 0 || m < 0 || k < 0) in.malformed("sizes must be n > 0, m >= 0, k >= 0");

  DirectedInstance inst;
  inst.vertex_count = n;
  tok = in.next("root");
  in.expect(tok, "root", 2);
  inst.root = in.number<VertexId>(tok[1]);
  id_in_range(inst.root, n, "root");

  inst.degree_bound.assign(static_cast<std::size_t>(n), 0);
  for (std::int32_t i = 0; i < n; ++i) {
    tok = in.next("vertex");
    in.expect(tok, "vertex", 3);
    const auto v = in.number<VertexId>(tok[1]);
    id_in_range(v, n, "vertex");
    if (inst.degree_bound[static_cast<std::size_t>(v)] != 0) in.malformed("duplicate vertex line");
    const auto d = in.number<std::int32_t>(tok[2]);
    if (d < 1) in.malformed("degree bound must be >= 1");
    inst.degree_bound[static_cast<std::size_t>(v)] = d;
  }
  for (std::int32_t i = 0; i < m; ++i) {
    tok = in.next("edge");
    in.expect(tok, "edge", 4);
    Edge e{in.number<VertexId>(tok[1]), in.number<VertexId>(tok[2]), in.number<Cost>(tok[3])};
    id_in_range(e.from, n, "edge");
    id_in_range(e.to, n, "edge");
    if (e.cost < 0) in.malformed("negative cost");
    inst.edges.push_back(e);
  }
  for (std::int32_t i = 0; i < k; ++i) {
    tok = in.next("terminal");
    in.expect(tok, "terminal", 2);
    const auto t = in.number<VertexId>(tok[1]);
    id_in_range(t, n, "terminal");
    inst.terminals.push_back(t);
  }
  if (!in.at_end()) in.malformed("trailing content");
  std::sort(inst.terminals.begin(), inst.terminals.end());
  if (std::adjacent_find(inst.terminals.begin(), inst.terminals.end()) != inst.terminals.end())
    fail(ErrorCode::kIo, "duplicate terminal");
  try {
    inst.validate();
  } catch (const Error& e) {
    fail(ErrorCode::kIo, e.what());
  }
  return inst;
}

std::string serialize_dst(const DirectedInstance& inst) {
  std::ostringstream os;
  os << "DBDST 1\n" << inst.vertex_count << ' ' << inst.edges.size() << ' ' << inst.terminals.size() << '\n';
  os << "root " << inst.root << '\n';
  for (std::int32_t v = 0; v < inst.vertex_count; ++v)
    os << "vertex " << v << ' ' << inst.degree_bound[static_cast<std::size_t>(v)] << '\n';
  for (const Edge& e : inst.edges) os << "edge " << e.from << ' ' << e.to << ' ' << e.cost << '\n';
  for (VertexId t : inst.terminals) os << "terminal " << t << '\n';
  return os.str();
}

GroupTreeInstance parse_gst(std::string_view text) {
  LineReader in(text);
  auto tok = in.next("header");
  if (tok.size() != 2 || tok[0] != "DBGST" || tok[1] != "1") in.malformed("expected 'DBGST 1'");
  tok = in.next("sizes");
  if (tok.size() != 2) in.malformed("expected 'n k'");
  const auto n = in.number<std::int32_t>(tok[0]);
  const auto k = in.number<std::int32_t>(tok[1]);
  if (n <= 0 || k < 0) in.malformed("sizes must be n > 0, k >= 0");

  GroupTreeInstance inst;
  inst.vertex_count = n;
  tok = in.next("root");
  in.expect(tok, "root", 2);
  const auto root = in.number<VertexId>(tok[1]);
  id_in_range(root, n, "root");

  inst.parent.assign(static_cast<std::size_t>(n), -2);
  inst.cost.assign(static_cast<std::size_t>(n), 0);
  inst.degree_bound.assign(static_cast<std::size_t>(n), 0);
  inst.synthetic_leaf.assign(static_cast<std::size_t>(n), 0);
  for (std::int32_t i = 0; i < n; ++i) {
    tok = in.next("vertex");
    in.expect(tok, "vertex", 5);
    const auto v = in.number<VertexId>(tok[1]);
    id_in_range(v, n, "vertex");
    if (inst.parent[static_cast<std::size_t>(v)] != -2) in.malformed("duplicate vertex line");
    const auto p = in.number<VertexId>(tok[2]);
    if (p != -1) id_in_range(p, n, "parent");
    if ((p == -1) != (v == root)) in.malformed("only the root may have parent -1");
    inst.parent[static_cast<std::size_t>(v)] = p;
    inst.cost[static_cast<std::size_t>(v)] = in.number<Cost>(tok[3]);
    if (inst.cost[static_cast<std::size_t>(v)] < 0) in.malformed("negative cost");
    inst.degree_bound[static_cast<std::size_t>(v)] = in.number<std::int32_t>(tok[4]);
    if (inst.degree_bound[static_cast<std::size_t>(v)] < 1) in.malformed("degree bound must be >= 1");
  }
  inst.groups.assign(static_cast<std::size_t>(k), {});
  std::vector<std::uint8_t> seen_group(static_cast<std::size_t>(k), 0);
  for (std::int32_t i = 0; i < k; ++i) {
    tok = in.next("group");
    if (tok.size() < 3 || tok[0] != "group") in.malformed("expected 'group <t> <size> <ids...>'");
    const auto t = in.number<std::int32_t>(tok[1]);
    id_in_range(t, k, "group");
    if (seen_group[static_cast<std::size_t>(t)]) in.malformed("duplicate group line");
    seen_group[static_cast<std::size_t>(t)] = 1;
    const auto size = in.number<std::int32_t>(tok[2]);
    if (size < 0 || static_cast<std::size_t>(size) + 3 != tok.size()) in.malformed("group size mismatch");
    for (std::int32_t j = 0; j < size; ++j) {
      const auto v = in.number<VertexId>(tok[3 + static_cast<std::size_t>(j)]);
      id_in_range(v, n, "group member");
      inst.groups[static_cast<std::size_t>(t)].push_back(v);
    }
  }
  if (!in.at_end()) in.malformed("trailing content");
  try {
    inst.validate(false);
  } catch (const Error& e) {
    fail(ErrorCode::kIo, e.what());
  }
  return inst;
}

std::string serialize_gst(const GroupTreeInstance& inst) {
  std::ostringstream os;
  os << "DBGST 1\n" << inst.vertex_count << ' ' << inst.groups.size() << '\n';
  os << "root " << inst.root() << '\n';
  for (std::int32_t v = 0; v < inst.vertex_count; ++v) {
    const auto i = static_cast<std::size_t>(v);
    os << "vertex " << v << ' ' << inst.parent[i] << ' ' << inst.cost[i] << ' ' << inst.degree_bound[i] << '\n';
  }
  for (std::size_t t = 0; t < inst.groups.size(); ++t) {
    os << "group " << t << ' ' << inst.groups[t].size();
    for (VertexId v : inst.groups[t]) os << ' ' << v;
    os << '\n';
  }
  return os.str();
}

}  // namespace dbnd
