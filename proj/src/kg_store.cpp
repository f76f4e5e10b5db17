#include "kgrat/kg_store.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <istream>
#include <sstream>
#include <unordered_map>

#include "kgrat/error.hpp"
#include "kgrat/text.hpp"

namespace kgrat {
namespace {

constexpr std::string_view kSnapshotMagic{"KGRATG\x01\x00", 8};

void build_csr(std::size_t n, std::vector<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>> rows,
               std::vector<std::uint32_t>& offsets, std::vector<AdjacentEdge>& edges) {
  // rows are (owner, relation, other)
  std::sort(rows.begin(), rows.end());
  offsets.assign(n + 1, 0);
  edges.clear();
  edges.reserve(rows.size());
  for (const auto& [owner, rel, other] : rows) {
    ++offsets[owner + 1];
    edges.push_back({RelationId{rel}, EntityId{other}});
  }
  for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
}

class ByteWriter {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_.append(s);
  }
  void raw(std::string_view s) { out_.append(s); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view in) : in_(in) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
    }
    pos_ += 4;
    return v;
  }
  std::string str() {
    const auto len = u32();
    need(len);
    std::string s(in_.substr(pos_, len));
    pos_ += len;
    return s;
  }
  std::string_view raw(std::size_t len) {
    need(len);
    auto s = in_.substr(pos_, len);
    pos_ += len;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t len) const {
    if (pos_ + len > in_.size()) throw LoadError(0, "truncated graph snapshot");
  }
  std::string_view in_;
  std::size_t pos_ = 0;
};

}  // namespace

Traversal reversed(Traversal t) {
  switch (t) {
    case Traversal::kOutgoing:
      return Traversal::kIncoming;
    case Traversal::kIncoming:
      return Traversal::kOutgoing;
    case Traversal::kBoth:
      break;
  }
  return Traversal::kBoth;
}

std::string_view to_string(Traversal t) {
  switch (t) {
    case Traversal::kOutgoing:
      return "outgoing";
    case Traversal::kIncoming:
      return "incoming";
    case Traversal::kBoth:
      break;
  }
  return "both";
}

Traversal parse_traversal(std::string_view s) {
  if (s == "outgoing") return Traversal::kOutgoing;
  if (s == "incoming") return Traversal::kIncoming;
  if (s == "both") return Traversal::kBoth;
  throw ConfigError("unknown traversal direction '" + std::string(s) + "'");
}

KnowledgeGraph::KnowledgeGraph(std::vector<std::string> entity_labels,
                               std::vector<std::string> relation_labels,
                               std::vector<Triple> triples)
    : entity_labels_(std::move(entity_labels)),
      relation_labels_(std::move(relation_labels)) {
  const auto n = entity_labels_.size();
  std::sort(triples.begin(), triples.end());
  triples.erase(std::unique(triples.begin(), triples.end()), triples.end());

  std::vector<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>> out_rows, in_rows;
  out_rows.reserve(triples.size());
  in_rows.reserve(triples.size());
  for (const auto& t : triples) {
    if (t.subject.value() >= n || t.object.value() >= n ||
        t.relation.value() >= relation_labels_.size()) {
      throw LoadError(0, "triple references an id outside the label tables");
    }
    out_rows.emplace_back(t.subject.value(), t.relation.value(), t.object.value());
    in_rows.emplace_back(t.object.value(), t.relation.value(), t.subject.value());
  }
  build_csr(n, std::move(out_rows), out_offsets_, out_edges_);
  build_csr(n, std::move(in_rows), in_offsets_, in_edges_);

  for (std::uint32_t i = 0; i < n; ++i) {
    entity_index_[text::canonicalize(entity_labels_[i])].push_back(EntityId{i});
  }
  for (std::uint32_t i = 0; i < relation_labels_.size(); ++i) {
    relation_index_.try_emplace(text::canonicalize(relation_labels_[i]), RelationId{i});
  }
}

void KnowledgeGraph::check(EntityId e) const {
  if (!valid(e)) {
    throw LookupError("entity id " + std::to_string(e.value()) + " out of range");
  }
}

const std::string& KnowledgeGraph::entity_label(EntityId e) const {
  check(e);
  return entity_labels_[e.value()];
}

const std::string& KnowledgeGraph::relation_label(RelationId r) const {
  if (!valid(r)) {
    throw LookupError("relation id " + std::to_string(r.value()) + " out of range");
  }
  return relation_labels_[r.value()];
}

std::optional<EntityId> KnowledgeGraph::entity_by_label(std::string_view label) const {
  const auto it = entity_index_.find(text::canonicalize(label));
  if (it == entity_index_.end()) return std::nullopt;
  return it->second.front();
}

std::optional<EntityId> KnowledgeGraph::entity_by_exact_label(std::string_view label) const {
  const auto it = entity_index_.find(text::canonicalize(label));
  if (it == entity_index_.end()) return std::nullopt;
  const auto stored = text::normalize_label(label);
  for (const auto e : it->second) {
    if (entity_labels_[e.value()] == stored) return e;
  }
  return std::nullopt;
}

std::vector<EntityId> KnowledgeGraph::entities_by_label(std::string_view label) const {
  const auto it = entity_index_.find(text::canonicalize(label));
  if (it == entity_index_.end()) return {};
  return it->second;
}

std::optional<RelationId> KnowledgeGraph::relation_by_label(std::string_view label) const {
  const auto it = relation_index_.find(text::canonicalize(label));
  if (it == relation_index_.end()) return std::nullopt;
  return it->second;
}

std::span<const AdjacentEdge> KnowledgeGraph::out_edges(EntityId e) const {
  check(e);
  return {out_edges_.data() + out_offsets_[e.value()],
          out_offsets_[e.value() + 1] - out_offsets_[e.value()]};
}

std::span<const AdjacentEdge> KnowledgeGraph::in_edges(EntityId e) const {
  check(e);
  return {in_edges_.data() + in_offsets_[e.value()],
          in_offsets_[e.value() + 1] - in_offsets_[e.value()]};
}

std::vector<Neighbor> KnowledgeGraph::neighbors(EntityId e, Traversal t) const {
  std::vector<Neighbor> out;
  for_each_neighbor(e, t, [&](const Neighbor& n) { out.push_back(n); });
  return out;
}

bool KnowledgeGraph::has_triple(const Triple& t) const {
  if (!valid(t.subject) || !valid(t.object)) return false;
  const auto edges = out_edges(t.subject);
  const AdjacentEdge key{t.relation, t.object};
  return std::binary_search(edges.begin(), edges.end(), key,
                            [](const AdjacentEdge& a, const AdjacentEdge& b) {
                              return std::pair(a.relation, a.entity) <
                                     std::pair(b.relation, b.entity);
                            });
}

std::vector<Triple> KnowledgeGraph::triples() const {
  std::vector<Triple> out;
  out.reserve(triple_count());
  for (std::uint32_t s = 0; s < entity_count(); ++s) {
    for (const auto& a : out_edges(EntityId{s})) out.push_back({EntityId{s}, a.relation, a.entity});
  }
  return out;
}

std::string KnowledgeGraph::serialize() const {
  ByteWriter w;
  w.raw(kSnapshotMagic);
  w.u32(static_cast<std::uint32_t>(entity_labels_.size()));
  for (const auto& l : entity_labels_) w.str(l);
  w.u32(static_cast<std::uint32_t>(relation_labels_.size()));
  for (const auto& l : relation_labels_) w.str(l);
  const auto ts = triples();
  w.u32(static_cast<std::uint32_t>(ts.size()));
  for (const auto& t : ts) {
    w.u32(t.subject.value());
    w.u32(t.relation.value());
    w.u32(t.object.value());
  }
  return w.take();
}

bool KnowledgeGraph::looks_like_snapshot(std::string_view bytes) {
  return bytes.substr(0, kSnapshotMagic.size()) == kSnapshotMagic;
}

KnowledgeGraph KnowledgeGraph::deserialize(std::string_view bytes) {
  ByteReader r(bytes);
  if (r.raw(kSnapshotMagic.size()) != kSnapshotMagic) {
    throw LoadError(0, "not a graph snapshot (bad magic)");
  }
  std::vector<std::string> entities(r.u32());
  for (auto& l : entities) l = r.str();
  std::vector<std::string> relations(r.u32());
  for (auto& l : relations) l = r.str();
  std::vector<Triple> ts(r.u32());
  for (auto& t : ts) {
    t.subject = EntityId{r.u32()};
    t.relation = RelationId{r.u32()};
    t.object = EntityId{r.u32()};
  }
  if (!r.done()) throw LoadError(0, "trailing bytes after graph snapshot");
  return KnowledgeGraph(std::move(entities), std::move(relations), std::move(ts));
}

void GraphBuilder::add(std::string_view subject, std::string_view relation,
                       std::string_view object) {
  for (auto f : {subject, relation, object}) {
    if (!text::is_valid_utf8(f)) throw LoadError(0, "field is not valid UTF-8");
  }
  auto s = text::normalize_label(subject);
  auto r = text::normalize_label(relation);
  auto o = text::normalize_label(object);
  if (s.empty() || r.empty() || o.empty()) throw LoadError(0, "empty field");
  rows_.emplace_back(std::move(s), std::move(r), std::move(o));
}

KnowledgeGraph GraphBuilder::build() const {
  auto rows = rows_;
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());

  std::vector<std::string> entities, relations;
  std::unordered_map<std::string, std::uint32_t> entity_ids, relation_ids;
  auto intern = [](std::unordered_map<std::string, std::uint32_t>& ids,
                   std::vector<std::string>& labels, const std::string& label) {
    auto [it, fresh] = ids.try_emplace(label, static_cast<std::uint32_t>(labels.size()));
    if (fresh) labels.push_back(label);
    return it->second;
  };

  std::vector<Triple> triples;
  triples.reserve(rows.size());
  for (const auto& [s, r, o] : rows) {
    const auto sid = intern(entity_ids, entities, s);
    const auto rid = intern(relation_ids, relations, r);
    const auto oid = intern(entity_ids, entities, o);
    triples.push_back({EntityId{sid}, RelationId{rid}, EntityId{oid}});
  }
  return KnowledgeGraph(std::move(entities), std::move(relations), std::move(triples));
}

KnowledgeGraph load_graph(std::istream& in) {
  GraphBuilder builder;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;

    std::string_view rest = line;
    std::vector<std::string_view> fields;
    while (true) {
      const auto tab = rest.find('\t');
      fields.push_back(rest.substr(0, tab));
      if (tab == std::string_view::npos) break;
      rest.remove_prefix(tab + 1);
    }
    if (fields.size() != 3) {
      throw LoadError(lineno, "expected 3 tab-separated fields, found " +
                                  std::to_string(fields.size()));
    }
    try {
      builder.add(fields[0], fields[1], fields[2]);
    } catch (const LoadError& e) {
      throw LoadError(lineno, e.what());
    }
  }
  return builder.build();
}

KnowledgeGraph load_graph_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  return load_graph(in);
}

KnowledgeGraph load_graph_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError(0, "cannot open graph file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();
  if (KnowledgeGraph::looks_like_snapshot(bytes)) return KnowledgeGraph::deserialize(bytes);
  return load_graph_text(bytes);
}

void save_snapshot(const KnowledgeGraph& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write snapshot " + path.string());
  const auto bytes = g.serialize();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace kgrat
