#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "grrw/rules/ast.hpp"

namespace grrw::rules {

// Rules and subpatterns resolved against one schema. Sources may be added
// incrementally (e.g. extract.grg, then export.gri); later sources can use
// subpatterns of earlier ones. Within one source, declaration order is free.
class RuleSet {
 public:
  explicit RuleSet(std::shared_ptr<const Schema> schema);
  RuleSet(RuleSet&&) noexcept = default;
  RuleSet& operator=(RuleSet&&) noexcept = default;

  // Throws ParseError ("file:line:col: message") on syntax and resolution errors.
  void add_source(std::string_view text, const std::string& file = {});

  const Schema& schema() const { return *schema_; }
  const std::shared_ptr<const Schema>& schema_ptr() const { return schema_; }

  const Rule* find_rule(std::string_view name) const;
  const SubpatternDecl* find_subpattern(std::string_view name) const;
  const SubpatternDecl& subpattern(int index) const { return *subpatterns_.at(index); }
  std::span<const std::unique_ptr<Rule>> rules() const { return rules_; }
  std::span<const std::unique_ptr<SubpatternDecl>> subpatterns() const { return subpatterns_; }

 private:
  friend class Parser;
  std::shared_ptr<const Schema> schema_;
  std::vector<std::unique_ptr<Rule>> rules_;
  std::vector<std::unique_ptr<SubpatternDecl>> subpatterns_;
};

RuleSet parse_rules(std::string_view text, std::shared_ptr<const Schema> schema,
                    const std::string& file = {});

}  // namespace grrw::rules
