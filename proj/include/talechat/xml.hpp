#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include <boost/property_tree/ptree.hpp>

namespace talechat::xml {

using Tree = boost::property_tree::ptree;

/// Escapes the five predefined entities. Carriage returns become "&#13;" so
/// they survive a parse.
std::string escape(std::string_view raw);

/// Raised for malformed input; what() is "file:line: message".
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string file, long line, const std::string& message);

  const std::string& file() const { return file_; }
  long line() const { return line_; }

 private:
  std::string file_;
  long line_;
};

/// Parses a document, preserving whitespace in text nodes.
Tree parse(std::string_view contents, const std::string& filename);
Tree parse_file(const std::filesystem::path& path);

/// Attribute value or empty string.
std::string attribute(const Tree& node, const std::string& name);

/// Writes `contents` to `path` via a temporary file and rename.
void write_file_atomically(const std::filesystem::path& path, std::string_view contents);

}  // namespace talechat::xml
