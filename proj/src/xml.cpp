#include "sia/xml.hpp"

#include <expat.h>

#include <algorithm>
#include <memory>

namespace sia::xml {

const std::string* Element::attribute(std::string_view key) const {
    for (const auto& [k, v] : attributes)
        if (k == key) return &v;
    return nullptr;
}

void Element::set(std::string key, std::string value) {
    for (auto& [k, v] : attributes) {
        if (k == key) {
            v = std::move(value);
            return;
        }
    }
    attributes.emplace_back(std::move(key), std::move(value));
}

Element& Element::add_element(std::string child_name) {
    children.push_back(Node{Element{std::move(child_name)}});
    return children.back().element();
}

void Element::add_text(std::string text) {
    if (!children.empty() && !children.back().is_element()) {
        std::get<1>(children.back().value) += text;
        return;
    }
    children.push_back(Node{std::move(text)});
}

std::vector<const Element*> Element::elements() const {
    std::vector<const Element*> out;
    for (const auto& c : children)
        if (c.is_element()) out.push_back(&c.element());
    return out;
}

std::vector<const Element*> Element::elements(std::string_view child_name) const {
    std::vector<const Element*> out;
    for (const auto& c : children)
        if (c.is_element() && c.element().name == child_name) out.push_back(&c.element());
    return out;
}

const Element* Element::first(std::string_view child_name) const {
    for (const auto& c : children)
        if (c.is_element() && c.element().name == child_name) return &c.element();
    return nullptr;
}

std::string Element::text() const {
    std::string out;
    for (const auto& c : children)
        if (!c.is_element()) out += c.text();
    return out;
}

bool Element::has_element_children() const {
    return std::any_of(children.begin(), children.end(), [](const Node& n) { return n.is_element(); });
}

namespace {

bool is_blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(),
                       [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; });
}

bool has_content_text(const Element& e) {
    return std::any_of(e.children.begin(), e.children.end(),
                       [](const Node& n) { return !n.is_element() && !is_blank(n.text()); });
}

struct ParseState {
    XML_Parser parser = nullptr;
    ParseOptions options;
    Element root;
    bool have_root = false;
    std::vector<Element*> stack;
    std::string failure;
};

void XMLCALL on_start(void* data, const XML_Char* name, const XML_Char** atts) {
    auto* st = static_cast<ParseState*>(data);
    Element* e = nullptr;
    if (st->stack.empty()) {
        st->root = Element{name};
        st->have_root = true;
        e = &st->root;
    } else {
        e = &st->stack.back()->add_element(name);
    }
    e->line = static_cast<int>(XML_GetCurrentLineNumber(st->parser));
    e->column = static_cast<int>(XML_GetCurrentColumnNumber(st->parser)) + 1;
    for (int i = 0; atts[i] != nullptr; i += 2) e->attributes.emplace_back(atts[i], atts[i + 1]);
    st->stack.push_back(e);
}

void XMLCALL on_end(void* data, const XML_Char*) {
    auto* st = static_cast<ParseState*>(data);
    Element* e = st->stack.back();
    st->stack.pop_back();
    if (st->options.strip_inter_element_whitespace && e->has_element_children() && !has_content_text(*e)) {
        std::erase_if(e->children, [](const Node& n) { return !n.is_element(); });
    }
}

void XMLCALL on_text(void* data, const XML_Char* s, int len) {
    auto* st = static_cast<ParseState*>(data);
    if (st->stack.empty()) return;
    st->stack.back()->add_text(std::string(s, static_cast<std::size_t>(len)));
}

void XMLCALL on_entity_decl(void* data, const XML_Char*, int, const XML_Char*, int, const XML_Char*,
                            const XML_Char*, const XML_Char*, const XML_Char*) {
    auto* st = static_cast<ParseState*>(data);
    st->failure = "entity declarations are not accepted";
    XML_StopParser(st->parser, XML_FALSE);
}

struct ParserDeleter {
    void operator()(XML_ParserStruct* p) const { XML_ParserFree(p); }
};

}  // namespace

Result<Element> parse(std::string_view bytes, ParseOptions options) {
    std::unique_ptr<XML_ParserStruct, ParserDeleter> parser{XML_ParserCreate("UTF-8")};
    if (!parser) return make_error(ErrorCode::storage_failure, "cannot allocate XML parser");
    ParseState st;
    st.parser = parser.get();
    st.options = options;
    XML_SetUserData(parser.get(), &st);
    XML_SetElementHandler(parser.get(), on_start, on_end);
    XML_SetCharacterDataHandler(parser.get(), on_text);
    XML_SetEntityDeclHandler(parser.get(), on_entity_decl);

    auto status = XML_Parse(parser.get(), bytes.data(), static_cast<int>(bytes.size()), XML_TRUE);
    if (status != XML_STATUS_OK || !st.failure.empty()) {
        Error err = make_error(ErrorCode::parse_error,
                               st.failure.empty() ? XML_ErrorString(XML_GetErrorCode(parser.get()))
                                                  : st.failure);
        err.line = static_cast<int>(XML_GetCurrentLineNumber(parser.get()));
        err.column = static_cast<int>(XML_GetCurrentColumnNumber(parser.get())) + 1;
        return err;
    }
    if (!st.have_root) return make_error(ErrorCode::parse_error, "no root element");
    return std::move(st.root);
}

std::string escape_text(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '\r': out += "&#13;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::string escape_attribute(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\t': out += "&#9;"; break;
            case '\n': out += "&#10;"; break;
            case '\r': out += "&#13;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

namespace {

void write_open(std::string& out, const Element& e) {
    out += '<';
    out += e.name;
    auto attrs = e.attributes;
    std::sort(attrs.begin(), attrs.end());
    for (const auto& [k, v] : attrs) {
        out += ' ';
        out += k;
        out += "=\"";
        out += escape_attribute(v);
        out += '"';
    }
}

void write_inline(std::string& out, const Element& e) {
    write_open(out, e);
    if (e.children.empty()) {
        out += "/>";
        return;
    }
    out += '>';
    for (const auto& c : e.children) {
        if (c.is_element())
            write_inline(out, c.element());
        else
            out += escape_text(c.text());
    }
    out += "</";
    out += e.name;
    out += '>';
}

}  // namespace

void write_element(std::string& out, const Element& e, int depth) {
    out.append(static_cast<std::size_t>(depth) * 2, ' ');
    bool nested = e.has_element_children() && !has_content_text(e);
    if (!nested) {
        write_inline(out, e);
        out += '\n';
        return;
    }
    write_open(out, e);
    out += ">\n";
    for (const auto& c : e.children) {
        if (c.is_element()) write_element(out, c.element(), depth + 1);
    }
    out.append(static_cast<std::size_t>(depth) * 2, ' ');
    out += "</";
    out += e.name;
    out += ">\n";
}

std::string write(const Element& root, bool with_declaration) {
    std::string out;
    if (with_declaration) out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    write_element(out, root, 0);
    return out;
}

}  // namespace sia::xml
