#pragma once

#include <cstddef>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "grrw/graph.hpp"
#include "grrw/sequences.hpp"

// Step trace of rule applications as line-delimited JSON (docs/shell.md):
// one snapshot record describing the schema and the graph, then one record
// per event. No timestamps, so equal runs give byte-identical files.
namespace grrw::trace {

// Writes records to `out` as they happen. The snapshot is written on
// construction.
class TraceWriter : public seq::TraceHook {
 public:
  TraceWriter(std::ostream& out, const Graph& graph);

  void sequence_enter(const seq::Sequence& seq) override;
  void rule_applied(const rules::Rule& rule, const rules::Match& match, const seq::Delta& delta,
                    const std::string& emitted) override;
  void rule_failed(const rules::Rule& rule) override;
  void sequence_exit(const seq::Sequence& seq, bool result) override;

  // Records written so far, snapshot included.
  std::size_t records() const { return ordinal_; }

 private:
  void write(const std::string& line);

  std::ostream& out_;
  const Graph& graph_;
  std::size_t ordinal_ = 0;
};

struct Binding {
  std::string name;
  ElemId id = kNoElement;
  std::string cls;
};

struct Event {
  enum class Kind { SequenceEnter, RuleApplied, RuleFailed, SequenceExit };
  std::size_t ordinal = 0;
  Kind kind = Kind::SequenceEnter;
  std::string sequence;  // SequenceEnter: structural form
  std::string rule;      // RuleApplied, RuleFailed
  std::vector<Binding> bindings;
  seq::Delta delta;
  std::string emitted;
  bool result = false;  // SequenceExit
};

struct Trace {
  std::unique_ptr<Graph> snapshot;  // ids as recorded
  std::vector<Event> events;
};

// Reads a trace against a schema with the recorded classes. Throws
// ParseError naming the record (line) that does not conform.
Trace read_trace(std::istream& in, std::shared_ptr<const Schema> schema,
                 const std::string& file = {});

// Snapshot plus the deltas of the first `upto` events (all by default).
// Element ids of the result equal the recorded ones.
Graph replay(const Trace& trace, std::optional<std::size_t> upto = std::nullopt);

}  // namespace grrw::trace
