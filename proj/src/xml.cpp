#include "grrw/xml.hpp"

#include <expat.h>

#include <fstream>
#include <memory>
#include <sstream>

#include "grrw/error.hpp"

namespace grrw::xml {

const std::string* Element::attribute(std::string_view key) const {
  for (const auto& [k, v] : attributes) {
    if (k == key) return &v;
  }
  return nullptr;
}

std::string_view Element::prefix() const {
  auto colon = name.find(':');
  return colon == std::string::npos ? std::string_view{} : std::string_view(name).substr(0, colon);
}

std::string_view Element::local_name() const {
  auto colon = name.find(':');
  return colon == std::string::npos ? std::string_view(name) : std::string_view(name).substr(colon + 1);
}

namespace {

struct Builder {
  XML_Parser parser = nullptr;
  std::vector<Element*> stack;
  Element root;
  bool has_root = false;

  static void start(void* data, const XML_Char* name, const XML_Char** attrs) {
    auto* self = static_cast<Builder*>(data);
    Element el;
    el.name = name;
    el.line = XML_GetCurrentLineNumber(self->parser);
    for (std::size_t i = 0; attrs[i]; i += 2) el.attributes.emplace_back(attrs[i], attrs[i + 1]);
    if (self->stack.empty()) {
      self->root = std::move(el);
      self->has_root = true;
      self->stack.push_back(&self->root);
    } else {
      auto& siblings = self->stack.back()->children;
      siblings.push_back(std::move(el));
      self->stack.push_back(&siblings.back());
    }
  }

  static void end(void* data, const XML_Char*) { static_cast<Builder*>(data)->stack.pop_back(); }

  static void chars(void* data, const XML_Char* s, int len) {
    auto* self = static_cast<Builder*>(data);
    if (!self->stack.empty()) self->stack.back()->text.append(s, static_cast<std::size_t>(len));
  }
};

}  // namespace

Document parse(std::string_view text, std::string source) {
  std::unique_ptr<std::remove_pointer_t<XML_Parser>, decltype(&XML_ParserFree)> parser(
      XML_ParserCreate("UTF-8"), &XML_ParserFree);
  if (!parser) throw Error("cannot create XML parser");
  Builder builder;
  builder.parser = parser.get();
  XML_SetUserData(parser.get(), &builder);
  XML_SetElementHandler(parser.get(), &Builder::start, &Builder::end);
  XML_SetCharacterDataHandler(parser.get(), &Builder::chars);
  // The pointer stack stays valid: only the innermost open element's children
  // vector grows, and the siblings it may relocate are already closed.
  if (XML_Parse(parser.get(), text.data(), static_cast<int>(text.size()), XML_TRUE) ==
      XML_STATUS_ERROR) {
    throw ParseError(source, XML_GetCurrentLineNumber(parser.get()),
                     XML_GetCurrentColumnNumber(parser.get()) + 1,
                     XML_ErrorString(XML_GetErrorCode(parser.get())));
  }
  if (!builder.has_root) throw ParseError(source, 1, 1, "no root element");
  return Document{std::move(source), std::move(builder.root)};
}

Document parse_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

std::string escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      case '\'':
        out += "&apos;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

}  // namespace grrw::xml
