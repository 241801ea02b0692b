#pragma once

// Minimal XML document model: elements, attributes and text, parsed with
// expat and written back in one canonical form (sorted attributes, two-space
// indentation, LF line endings).

#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "sia/result.hpp"

namespace sia::xml {

struct Node;

struct Element {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attributes;
    std::vector<Node> children;
    int line = 0;
    int column = 0;

    Element() = default;
    explicit Element(std::string n) : name(std::move(n)) {}

    const std::string* attribute(std::string_view key) const;
    void set(std::string key, std::string value);

    Element& add_element(std::string child_name);
    void add_text(std::string text);

    /// Child elements only, in document order.
    std::vector<const Element*> elements() const;
    std::vector<const Element*> elements(std::string_view child_name) const;
    const Element* first(std::string_view child_name) const;

    /// Concatenated direct text children.
    std::string text() const;
    bool has_element_children() const;

    bool operator==(const Element& other) const;
};

struct Node {
    std::variant<Element, std::string> value;

    bool is_element() const { return value.index() == 0; }
    const Element& element() const { return std::get<0>(value); }
    Element& element() { return std::get<0>(value); }
    const std::string& text() const { return std::get<1>(value); }

    bool operator==(const Node& other) const { return value == other.value; }
};

inline bool Element::operator==(const Element& o) const {
    return name == o.name && attributes == o.attributes && children == o.children;
}

struct ParseOptions {
    // drop whitespace-only text nodes that sit between child elements
    bool strip_inter_element_whitespace = true;
};

/// Parses a complete document; errors carry line and column.
Result<Element> parse(std::string_view bytes, ParseOptions options = {});

std::string escape_text(std::string_view text);
std::string escape_attribute(std::string_view text);

/// Canonical serialization. Elements holding non-whitespace text are written
/// on one line with their content; other elements nest with indentation.
std::string write(const Element& root, bool with_declaration = true);

void write_element(std::string& out, const Element& element, int depth);

}  // namespace sia::xml
