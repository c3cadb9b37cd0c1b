#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fet/error.hpp"

namespace fet {

/// Raised when an ontology document or node list violates the forest invariants.
class OntologyError : public Error {
 public:
  enum class Kind { Malformed, DuplicatePath, DanglingParent, Cycle };

  OntologyError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

struct TypeNode {
  std::string path;                          // e.g. "/person/artist"
  std::string name;                          // surface used in hypotheses, e.g. "artist"
  std::optional<std::string> display_name;   // as given in the ontology file, if any
  std::optional<std::string> parent;
  std::vector<std::string> children;         // document order

  friend bool operator==(const TypeNode&, const TypeNode&) = default;
};

/// Hypothesis-type candidates for NLI labels relative to one type.
struct ContrastSets {
  std::vector<std::string> entailment;
  std::vector<std::string> neutral;
  std::vector<std::string> contradiction;
};

/// Last path segment with underscores mapped to spaces, lowercased.
std::string type_name_from_path(std::string_view path);

/// Lowercase, exactly one leading slash, no trailing slash, no empty segments.
std::string normalize_path(std::string_view path);

/// True when `ancestor` is a strict path prefix of `descendant` at a segment boundary.
bool is_proper_ancestor_path(std::string_view ancestor, std::string_view descendant);

/// Forest of entity types keyed by slash-delimited paths. Immutable once built.
class TypeOntology {
 public:
  TypeOntology() = default;

  /// Validates and indexes an explicit node list. Children lists are
  /// recomputed from parent links when empty.
  static TypeOntology from_nodes(std::vector<TypeNode> nodes);

  /// Builds an ontology from paths in document order; parents are derived from the paths.
  static TypeOntology from_paths(const std::vector<std::string>& paths);

  /// Ontology file: one JSON object per line with `path` and optional `display_name`.
  static TypeOntology parse(std::istream& in);
  static TypeOntology load(const std::filesystem::path& file);
  void write(std::ostream& out) const;
  void save(const std::filesystem::path& file) const;

  bool empty() const { return nodes_.empty(); }
  std::size_t size() const { return nodes_.size(); }
  bool contains(std::string_view path) const;
  const TypeNode& node(std::string_view path) const;

  const std::vector<TypeNode>& nodes() const { return nodes_; }
  const std::vector<std::string>& roots() const { return roots_; }

  /// 1 for roots.
  std::size_t depth(std::string_view path) const;
  std::string root_of(std::string_view path) const;

  /// Proper ancestors from depth 1 down to the parent.
  std::vector<std::string> ancestors(std::string_view path) const;

  /// Root-to-node path including `path` itself.
  std::vector<std::string> lineage(std::string_view path) const;

  /// Nodes sharing the parent of `path`. Roots are siblings of each other
  /// under the conceptual forest root.
  std::vector<std::string> siblings(std::string_view path) const;

  const std::vector<std::string>& children(std::string_view path) const;

  ContrastSets contrast_sets(std::string_view path, bool include_siblings) const;

  friend bool operator==(const TypeOntology& a, const TypeOntology& b) {
    return a.nodes_ == b.nodes_ && a.roots_ == b.roots_;
  }

 private:
  std::size_t index_of(std::string_view path) const;

  std::vector<TypeNode> nodes_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::string> roots_;
};

/// Instances and topics attached to ontology nodes.
class Enrichment {
 public:
  /// Adds an instance unless it is empty or a case-insensitive duplicate.
  /// Returns whether it was added.
  bool add_instance(const std::string& path, const std::string& instance);
  bool add_topic(const std::string& path, const std::string& topic);

  const std::vector<std::string>& instances(std::string_view path) const;
  const std::vector<std::string>& topics(std::string_view path) const;

  const std::map<std::string, std::vector<std::string>>& all_instances() const { return instances_; }
  const std::map<std::string, std::vector<std::string>>& all_topics() const { return topics_; }

  std::size_t instance_count() const;

  /// Throws InvalidArgument if a keyed path is absent from `ontology`.
  void validate(const TypeOntology& ontology) const;

  /// Enrichment file: one JSON object per line with `path`, `instances`, `topics`.
  static Enrichment parse(std::istream& in);
  static Enrichment load(const std::filesystem::path& file);
  void write(std::ostream& out) const;
  void save(const std::filesystem::path& file) const;

  friend bool operator==(const Enrichment&, const Enrichment&) = default;

 private:
  std::map<std::string, std::vector<std::string>> instances_;
  std::map<std::string, std::vector<std::string>> topics_;
};

}  // namespace fet
