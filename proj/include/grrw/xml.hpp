#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace grrw::xml {

// Minimal DOM. Names are kept as written (qualified, e.g. "ecore:EPackage");
// namespace prefixes are resolved by the consumers that need them.
struct Element {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attributes;  // document order
  std::vector<Element> children;
  std::string text;  // concatenated character data
  std::size_t line = 0;

  const std::string* attribute(std::string_view key) const;
  std::string_view prefix() const;
  std::string_view local_name() const;
};

struct Document {
  std::string source;  // file name for diagnostics
  Element root;
};

// Throws ParseError on malformed input.
Document parse(std::string_view text, std::string source = {});
Document parse_file(const std::filesystem::path& path);

// Escapes &, <, >, " and ' for attribute values and text.
std::string escape(std::string_view text);

}  // namespace grrw::xml
