#include "fet/ontology.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "fet/io.hpp"
#include "fet/text.hpp"

namespace fet {

namespace {

const std::vector<std::string> kEmpty;

std::vector<std::string_view> segments_of(std::string_view path) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < path.size()) {
    if (path[i] == '/') {
      ++i;
      continue;
    }
    const auto end = path.find('/', i);
    const auto stop = end == std::string_view::npos ? path.size() : end;
    out.push_back(path.substr(i, stop - i));
    i = stop;
  }
  return out;
}

void check_path_syntax(const std::string& path) {
  auto fail = [&](const std::string& why) {
    throw OntologyError(OntologyError::Kind::Malformed, "type path '" + path + "': " + why);
  };
  if (path.size() < 2 || path.front() != '/') fail("must start with '/' and name a segment");
  if (path.back() == '/') fail("trailing '/'");
  if (path.find("//") != std::string::npos) fail("empty segment");
  for (unsigned char c : path) {
    if (std::isspace(c)) fail("whitespace in segment");
  }
}

std::optional<std::string> parent_from_path(const std::string& path) {
  const auto slash = path.rfind('/');
  if (slash == 0 || slash == std::string::npos) return std::nullopt;
  return path.substr(0, slash);
}

}  // namespace

std::string type_name_from_path(std::string_view path) {
  const auto segs = segments_of(path);
  if (segs.empty()) return {};
  std::string name(segs.back());
  std::replace(name.begin(), name.end(), '_', ' ');
  return text::to_lower(name);
}

std::string normalize_path(std::string_view path) {
  std::string out;
  const auto trimmed = text::trim(path);
  for (auto seg : segments_of(trimmed)) {
    out += '/';
    out += text::to_lower(seg);
  }
  return out;
}

bool is_proper_ancestor_path(std::string_view ancestor, std::string_view descendant) {
  return descendant.size() > ancestor.size() + 1 && descendant.starts_with(ancestor) &&
         descendant[ancestor.size()] == '/' && !ancestor.empty();
}

TypeOntology TypeOntology::from_nodes(std::vector<TypeNode> nodes) {
  TypeOntology onto;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    auto& n = nodes[i];
    check_path_syntax(n.path);
    if (!onto.index_.emplace(n.path, i).second) {
      throw OntologyError(OntologyError::Kind::DuplicatePath, "duplicate type path '" + n.path + "'");
    }
  }
  for (const auto& n : nodes) {
    if (n.parent && !onto.index_.contains(*n.parent)) {
      throw OntologyError(OntologyError::Kind::DanglingParent,
                          "type '" + n.path + "' references missing parent '" + *n.parent + "'");
    }
  }
  // A parent chain longer than the node count must revisit a node.
  for (const auto& n : nodes) {
    const TypeNode* cur = &n;
    std::size_t steps = 0;
    while (cur->parent) {
      if (++steps > nodes.size()) {
        throw OntologyError(OntologyError::Kind::Cycle, "cycle through type '" + n.path + "'");
      }
      cur = &nodes[onto.index_.at(*cur->parent)];
    }
  }
  std::vector<std::vector<std::string>> derived_children(nodes.size());
  for (const auto& n : nodes) {
    const auto expected_parent = parent_from_path(n.path);
    if (n.parent != expected_parent) {
      throw OntologyError(OntologyError::Kind::Malformed,
                          "type '" + n.path + "' is not '<parent path>/<segment>' of its parent");
    }
    if (n.parent) {
      derived_children[onto.index_.at(*n.parent)].push_back(n.path);
    } else {
      onto.roots_.push_back(n.path);
    }
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    auto& n = nodes[i];
    if (!n.children.empty()) {
      auto given = n.children;
      auto derived = derived_children[i];
      std::sort(given.begin(), given.end());
      std::sort(derived.begin(), derived.end());
      if (given != derived) {
        throw OntologyError(OntologyError::Kind::Malformed,
                            "children of '" + n.path + "' do not resolve to nodes naming it as parent");
      }
    }
    n.children = std::move(derived_children[i]);
    if (n.name.empty()) {
      n.name = n.display_name ? text::to_lower(text::trim(*n.display_name))
                              : type_name_from_path(n.path);
    }
    if (n.name.empty()) {
      throw OntologyError(OntologyError::Kind::Malformed, "type '" + n.path + "' has an empty name");
    }
  }
  onto.nodes_ = std::move(nodes);
  return onto;
}

TypeOntology TypeOntology::from_paths(const std::vector<std::string>& paths) {
  std::vector<TypeNode> nodes;
  nodes.reserve(paths.size());
  for (const auto& p : paths) {
    check_path_syntax(p);
    nodes.push_back(TypeNode{p, {}, std::nullopt, parent_from_path(p), {}});
  }
  return from_nodes(std::move(nodes));
}

TypeOntology TypeOntology::parse(std::istream& in) {
  std::vector<TypeNode> nodes;
  try {
    io::read_jsonl(in, [&](const io::Json& rec, std::size_t line) {
      if (!rec.contains("path") || !rec["path"].is_string()) {
        throw OntologyError(OntologyError::Kind::Malformed,
                            "line " + std::to_string(line) + ": missing string field 'path'");
      }
      TypeNode n;
      n.path = rec["path"].get<std::string>();
      check_path_syntax(n.path);
      if (rec.contains("display_name")) {
        if (!rec["display_name"].is_string()) {
          throw OntologyError(OntologyError::Kind::Malformed,
                              "line " + std::to_string(line) + ": 'display_name' must be a string");
        }
        n.display_name = rec["display_name"].get<std::string>();
      }
      n.parent = parent_from_path(n.path);
      nodes.push_back(std::move(n));
    });
  } catch (const ParseError& e) {
    throw OntologyError(OntologyError::Kind::Malformed, e.what());
  }
  return from_nodes(std::move(nodes));
}

TypeOntology TypeOntology::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open ontology file " + file.string());
  return parse(in);
}

void TypeOntology::write(std::ostream& out) const {
  for (const auto& n : nodes_) {
    io::Json rec{{"path", n.path}};
    if (n.display_name) rec["display_name"] = *n.display_name;
    io::write_jsonl_record(out, rec);
  }
}

void TypeOntology::save(const std::filesystem::path& file) const {
  auto out = io::open_output(file);
  write(out);
}

bool TypeOntology::contains(std::string_view path) const { return index_.contains(std::string(path)); }

std::size_t TypeOntology::index_of(std::string_view path) const {
  const auto it = index_.find(std::string(path));
  if (it == index_.end()) throw NotFound("unknown type path '" + std::string(path) + "'");
  return it->second;
}

const TypeNode& TypeOntology::node(std::string_view path) const { return nodes_[index_of(path)]; }

std::size_t TypeOntology::depth(std::string_view path) const { return ancestors(path).size() + 1; }

std::string TypeOntology::root_of(std::string_view path) const {
  const TypeNode* cur = &node(path);
  while (cur->parent) cur = &node(*cur->parent);
  return cur->path;
}

std::vector<std::string> TypeOntology::ancestors(std::string_view path) const {
  std::vector<std::string> out;
  const TypeNode* cur = &node(path);
  while (cur->parent) {
    out.push_back(*cur->parent);
    cur = &node(*cur->parent);
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<std::string> TypeOntology::lineage(std::string_view path) const {
  auto out = ancestors(path);
  out.emplace_back(path);
  return out;
}

std::vector<std::string> TypeOntology::siblings(std::string_view path) const {
  const auto& n = node(path);
  const auto& pool = n.parent ? node(*n.parent).children : roots_;
  std::vector<std::string> out;
  for (const auto& p : pool) {
    if (p != n.path) out.push_back(p);
  }
  return out;
}

const std::vector<std::string>& TypeOntology::children(std::string_view path) const {
  return node(path).children;
}

ContrastSets TypeOntology::contrast_sets(std::string_view path, bool include_siblings) const {
  ContrastSets sets;
  const auto& query = node(path);
  sets.entailment.push_back(query.path);
  sets.neutral = ancestors(path);
  const auto query_root = root_of(path);
  for (const auto& n : nodes_) {
    if (n.parent && root_of(n.path) != query_root) sets.contradiction.push_back(n.path);
  }
  if (include_siblings) {
    for (auto& s : siblings(path)) sets.contradiction.push_back(std::move(s));
  }
  return sets;
}

// ---------------------------------------------------------------------------

bool Enrichment::add_instance(const std::string& path, const std::string& instance) {
  const auto cleaned = text::trim(instance);
  if (cleaned.empty()) return false;
  auto& list = instances_[path];
  const auto key = text::to_lower(cleaned);
  for (const auto& existing : list) {
    if (text::to_lower(existing) == key) return false;
  }
  list.push_back(cleaned);
  return true;
}

bool Enrichment::add_topic(const std::string& path, const std::string& topic) {
  const auto cleaned = text::trim(topic);
  if (cleaned.empty()) return false;
  auto& list = topics_[path];
  if (std::find(list.begin(), list.end(), cleaned) != list.end()) return false;
  list.push_back(cleaned);
  return true;
}

const std::vector<std::string>& Enrichment::instances(std::string_view path) const {
  const auto it = instances_.find(std::string(path));
  return it == instances_.end() ? kEmpty : it->second;
}

const std::vector<std::string>& Enrichment::topics(std::string_view path) const {
  const auto it = topics_.find(std::string(path));
  return it == topics_.end() ? kEmpty : it->second;
}

std::size_t Enrichment::instance_count() const {
  std::size_t total = 0;
  for (const auto& [_, list] : instances_) total += list.size();
  return total;
}

void Enrichment::validate(const TypeOntology& ontology) const {
  for (const auto* table : {&instances_, &topics_}) {
    for (const auto& [path, _] : *table) {
      if (!ontology.contains(path)) {
        throw InvalidArgument("enrichment references unknown type path '" + path + "'");
      }
    }
  }
}

Enrichment Enrichment::parse(std::istream& in) {
  Enrichment e;
  io::read_jsonl(in, [&](const io::Json& rec, std::size_t line) {
    if (!rec.contains("path") || !rec["path"].is_string()) {
      throw ParseError("line " + std::to_string(line) + ": missing string field 'path'");
    }
    const auto path = rec["path"].get<std::string>();
    for (const auto& inst : rec.value("instances", std::vector<std::string>{})) {
      e.add_instance(path, inst);
    }
    for (const auto& topic : rec.value("topics", std::vector<std::string>{})) {
      e.add_topic(path, topic);
    }
  });
  return e;
}

Enrichment Enrichment::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open enrichment file " + file.string());
  try {
    return parse(in);
  } catch (const ParseError& e) {
    throw ParseError(file.string() + ": " + e.what());
  }
}

void Enrichment::write(std::ostream& out) const {
  std::map<std::string, bool> keys;
  for (const auto& [p, _] : instances_) keys[p] = true;
  for (const auto& [p, _] : topics_) keys[p] = true;
  for (const auto& [path, _] : keys) {
    io::write_jsonl_record(out, io::Json{{"path", path},
                                         {"instances", instances(path)},
                                         {"topics", topics(path)}});
  }
}

void Enrichment::save(const std::filesystem::path& file) const {
  auto out = io::open_output(file);
  write(out);
}

}  // namespace fet
