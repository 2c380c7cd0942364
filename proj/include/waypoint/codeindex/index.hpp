#pragma once

// Code navigation for the synthesizer: name search over records/functions/
// symbol declarations, raw snippet search, the static call graph, reference
// scans and per-file listings. Everything except `code` is built from the
// parsed AST; `code` is a substring scan so it finds fragments like
// "canary(" that are not names.
//
// The index is an immutable snapshot; queries only touch the usage counters
// (guarded by a mutex), so concurrent reads are safe.

#include <algorithm>
#include <array>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "json.hpp"
#include "waypoint/minilang/lexer.hpp"
#include "waypoint/minilang/program.hpp"

namespace waypoint::codeindex {

namespace ml = waypoint::minilang;

struct IndexEntry {
  enum class Kind { Function, Record, Symbol, Snippet };
  Kind kind = Kind::Snippet;
  std::string name;
  std::string file;
  int start_line = 0;
  int end_line = 0;  // inclusive
  std::string text;  // exact file slice of those lines
};

inline const char* entry_kind_name(IndexEntry::Kind k) {
  switch (k) {
    case IndexEntry::Kind::Function: return "function";
    case IndexEntry::Kind::Record: return "record";
    case IndexEntry::Kind::Symbol: return "symbol";
    case IndexEntry::Kind::Snippet: return "snippet";
  }
  return "?";
}

inline constexpr std::array<const char*, 10> kApiNames = {
    "class", "method",  "symbol",     "code",  "callers",
    "callees", "references", "files", "classes", "methods"};

class CodeIndex {
 public:
  explicit CodeIndex(const ml::Program& p) { build(p); }

  // --- the ten APIs --------------------------------------------------------

  std::vector<IndexEntry> class_(const std::string& name,
                                 const std::string& file = "") const {
    require_nonempty("class", "name", name);
    return name_search(records_, name, file);
  }

  std::vector<IndexEntry> method(const std::string& name,
                                 const std::string& file = "") const {
    require_nonempty("method", "name", name);
    return name_search(functions_, name, file);
  }

  std::vector<IndexEntry> symbol(const std::string& name) const {
    require_nonempty("symbol", "name", name);
    return name_search(symbols_, name, "");
  }

  std::vector<IndexEntry> code(const std::string& fragment) const {
    require_nonempty("code", "fragment", fragment);
    std::vector<IndexEntry> out;
    for (const auto& [path, lines] : file_lines_)
      for (size_t i = 0; i < lines.size(); ++i)
        if (lines[i].find(fragment) != std::string::npos) {
          IndexEntry e;
          e.kind = IndexEntry::Kind::Snippet;
          e.name = fragment;
          e.file = path;
          e.start_line = e.end_line = static_cast<int>(i + 1);
          e.text = lines[i];
          out.push_back(std::move(e));
        }
    return out;  // file_lines_ is sorted by path; lines ascend
  }

  std::vector<std::string> callers(const std::string& function) const {
    require_function(function);
    auto it = caller_names_.find(function);
    return it == caller_names_.end() ? std::vector<std::string>{} : it->second;
  }

  std::vector<std::string> callees(const std::string& function) const {
    require_function(function);
    auto it = callee_names_.find(function);
    return it == callee_names_.end() ? std::vector<std::string>{} : it->second;
  }

  std::vector<IndexEntry> references(const std::string& name) const {
    require_nonempty("references", "symbol", name);
    std::vector<IndexEntry> out;
    for (const auto& occ : occurrences_)
      if (occ.name == name) {
        IndexEntry e;
        e.kind = IndexEntry::Kind::Snippet;
        e.name = name;
        e.file = occ.file;
        e.start_line = e.end_line = occ.line;
        e.text = line_of(occ.file, occ.line);
        out.push_back(std::move(e));
      }
    return out;
  }

  std::vector<std::string> files(const std::string& filter = "") const {
    std::vector<std::string> out;
    for (const auto& [path, lines] : file_lines_)
      if (filter.empty() || path.find(filter) != std::string::npos) out.push_back(path);
    return out;
  }

  std::vector<std::string> classes(const std::string& file) const {
    require_nonempty("classes", "file", file);
    return list_in_file(records_, file);
  }

  std::vector<std::string> methods(const std::string& file) const {
    require_nonempty("methods", "file", file);
    return list_in_file(functions_, file);
  }

  // --- backend-facing dispatch ---------------------------------------------

  // Executes one tool call by name with JSON arguments and renders the result
  // as text. Also bumps the per-API usage counter.
  std::string call(const std::string& api, const nlohmann::ordered_json& args) const {
    count_usage(api);
    auto arg = [&](const char* key, bool required) -> std::string {
      if (!args.contains(key)) {
        if (required)
          throw InvalidArgumentError("tool '" + api + "' needs argument '" + key + "'");
        return "";
      }
      if (!args[key].is_string())
        throw InvalidArgumentError("tool '" + api + "': argument '" + std::string(key) +
                                       "' must be a string");
      return args[key].get<std::string>();
    };
    if (api == "class") return render_entries(class_(arg("name", true), arg("file", false)));
    if (api == "method") return render_entries(method(arg("name", true), arg("file", false)));
    if (api == "symbol") return render_entries(symbol(arg("name", true)));
    if (api == "code") return render_lines(code(arg("fragment", true)));
    if (api == "callers") return render_names(callers(arg("name", true)));
    if (api == "callees") return render_names(callees(arg("name", true)));
    if (api == "references") return render_lines(references(arg("symbol", true)));
    if (api == "files") return render_names(files(arg("filter", false)));
    if (api == "classes") return render_names(classes(arg("file", true)));
    if (api == "methods") return render_names(methods(arg("file", true)));
    throw InvalidArgumentError("unknown tool '" + api + "'");
  }

  std::map<std::string, int> usage() const {
    std::lock_guard<std::mutex> lock(usage_mutex_);
    return usage_;
  }

  // --- rendering -----------------------------------------------------------

  static std::string render_entries(const std::vector<IndexEntry>& entries) {
    if (entries.empty()) return "(no results)";
    std::string out;
    for (size_t i = 0; i < entries.size(); ++i) {
      const IndexEntry& e = entries[i];
      if (i) out += "\n";
      out += e.file + ":" + std::to_string(e.start_line) + "-" +
             std::to_string(e.end_line) + " " + entry_kind_name(e.kind) + " " + e.name +
             "\n" + e.text;
      if (out.back() != '\n') out += "\n";
    }
    return out;
  }

  static std::string render_lines(const std::vector<IndexEntry>& entries) {
    if (entries.empty()) return "(no results)";
    std::string out;
    for (const IndexEntry& e : entries)
      out += e.file + ":" + std::to_string(e.start_line) + ":" + e.text + "\n";
    return out;
  }

  static std::string render_names(const std::vector<std::string>& names) {
    if (names.empty()) return "(no results)";
    std::string out;
    for (const std::string& n : names) out += n + "\n";
    return out;
  }

  // Chat tool schemas for all ten APIs, in stable order.
  static nlohmann::ordered_json tool_schemas() {
    auto make = [](const char* name, const char* desc,
                   std::vector<std::array<const char*, 3>> params) {
      nlohmann::ordered_json props = nlohmann::ordered_json::object();
      std::vector<std::string> required;
      for (const auto& [pname, pdesc, preq] : params) {
        props[pname] = {{"type", "string"}, {"description", pdesc}};
        if (std::string(preq) == "required") required.push_back(pname);
      }
      nlohmann::ordered_json fn;
      fn["name"] = name;
      fn["description"] = desc;
      fn["parameters"] = {{"type", "object"}, {"properties", props}, {"required", required}};
      return nlohmann::ordered_json{{"type", "function"}, {"function", fn}};
    };
    nlohmann::ordered_json tools = nlohmann::ordered_json::array();
    tools.push_back(make("class", "Search for a record type by name.",
                         {{"name", "record name or substring", "required"},
                          {"file", "restrict to files whose path contains this", "optional"}}));
    tools.push_back(make("method", "Search for a function by name.",
                         {{"name", "function name or substring", "required"},
                          {"file", "restrict to files whose path contains this", "optional"}}));
    tools.push_back(make("symbol", "Search for a symbol declaration by name.",
                         {{"name", "symbol name or substring", "required"}}));
    tools.push_back(make("code", "Find source lines containing a code fragment.",
                         {{"fragment", "literal fragment to search for", "required"}}));
    tools.push_back(make("callers", "List the functions that call the given function.",
                         {{"name", "function name", "required"}}));
    tools.push_back(make("callees", "List the functions called by the given function.",
                         {{"name", "function name", "required"}}));
    tools.push_back(make("references", "List every occurrence of a symbol.",
                         {{"symbol", "identifier to look up", "required"}}));
    tools.push_back(make("files", "List source files.",
                         {{"filter", "keep paths containing this substring", "optional"}}));
    tools.push_back(make("classes", "List record types declared in a file.",
                         {{"file", "path or path substring", "required"}}));
    tools.push_back(make("methods", "List functions declared in a file.",
                         {{"file", "path or path substring", "required"}}));
    return tools;
  }

 private:
  struct Decl {
    std::string name;
    std::string file;
    int start_line;
    int end_line;
    IndexEntry::Kind kind;
  };
  struct Occurrence {
    std::string name;
    std::string file;
    int line;
  };

  void build(const ml::Program& p) {
    for (const ml::SourceFile& f : p.files) {
      std::vector<std::string> lines;
      std::string cur;
      for (char c : f.text) {
        if (c == '\n') {
          lines.push_back(cur);
          cur.clear();
        } else {
          cur.push_back(c);
        }
      }
      if (!cur.empty()) lines.push_back(cur);
      file_lines_.emplace_back(f.path, std::move(lines));
    }
    std::sort(file_lines_.begin(), file_lines_.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    auto file_path = [&](int idx) -> const std::string& {
      return p.files[static_cast<size_t>(idx)].path;
    };

    for (const std::string& name : p.record_order) {
      const ml::RecordDecl& r = p.records.at(name);
      records_.push_back({name, file_path(r.loc.file), r.loc.line, r.end_line,
                          IndexEntry::Kind::Record});
      symbols_.push_back({name, file_path(r.loc.file), r.loc.line, r.loc.line,
                          IndexEntry::Kind::Symbol});
      for (const ml::FieldDecl& fd : r.fields)
        symbols_.push_back({fd.name, file_path(fd.loc.file), fd.loc.line, fd.loc.line,
                            IndexEntry::Kind::Symbol});
    }
    for (const std::string& name : p.function_order) {
      const ml::Function& fn = p.functions.at(name);
      functions_.push_back({name, file_path(fn.loc.file), fn.loc.line, fn.end_line,
                            IndexEntry::Kind::Function});
      symbols_.push_back({name, file_path(fn.loc.file), fn.loc.line, fn.loc.line,
                          IndexEntry::Kind::Symbol});
      for (const ml::Param& par : fn.params)
        symbols_.push_back({par.name, file_path(par.loc.file), par.loc.line, par.loc.line,
                            IndexEntry::Kind::Symbol});
      ml::walk_statements(fn, [&](const ml::Stmt& s, const ml::StmtPath&) {
        if (s.kind == ml::StmtKind::Let)
          symbols_.push_back({s.name, file_path(s.loc.file), s.loc.line, s.loc.line,
                              IndexEntry::Kind::Symbol});
      });
    }

    callee_names_ = p.callee_names;
    caller_names_ = p.caller_names;
    for (const auto& [path, lines] : file_lines_) {
      std::string text;
      for (const std::string& l : lines) text += l + "\n";
      for (const ml::IdentOccurrence& occ : ml::identifier_occurrences(path, text))
        occurrences_.push_back({occ.name, path, occ.line});
    }
    std::sort(occurrences_.begin(), occurrences_.end(), [](const auto& a, const auto& b) {
      return a.file != b.file ? a.file < b.file
                              : a.line != b.line ? a.line < b.line : a.name < b.name;
    });
  }

  void require_nonempty(const char* api, const char* what, const std::string& v) const {
    if (v.empty())
      throw InvalidArgumentError(std::string("tool '") + api + "': '" + what +
                                     "' must not be empty");
  }

  void require_function(const std::string& name) const {
    for (const Decl& d : functions_)
      if (d.name == name) return;
    throw UnknownFunctionError("unknown function '" + name + "'");
  }

  const std::string& line_of(const std::string& file, int line) const {
    static const std::string empty;
    for (const auto& [path, lines] : file_lines_)
      if (path == file) {
        size_t i = static_cast<size_t>(line - 1);
        return i < lines.size() ? lines[i] : empty;
      }
    return empty;
  }

  std::string slice(const std::string& file, int start, int end) const {
    std::string out;
    for (int ln = start; ln <= end; ++ln) {
      out += line_of(file, ln);
      out += "\n";
    }
    return out;
  }

  std::vector<IndexEntry> name_search(const std::vector<Decl>& decls,
                                      const std::string& name,
                                      const std::string& file) const {
    std::vector<const Decl*> exact, partial;
    for (const Decl& d : decls) {
      if (!file.empty() && d.file.find(file) == std::string::npos) continue;
      if (d.name == name) exact.push_back(&d);
      else if (d.name.find(name) != std::string::npos) partial.push_back(&d);
    }
    auto by_pos = [](const Decl* a, const Decl* b) {
      return a->file != b->file ? a->file < b->file : a->start_line < b->start_line;
    };
    std::sort(exact.begin(), exact.end(), by_pos);
    std::sort(partial.begin(), partial.end(), by_pos);
    std::vector<IndexEntry> out;
    for (const auto* group : {&exact, &partial})
      for (const Decl* d : *group) {
        IndexEntry e;
        e.kind = d->kind;
        e.name = d->name;
        e.file = d->file;
        e.start_line = d->start_line;
        e.end_line = d->end_line;
        e.text = slice(d->file, d->start_line, d->end_line);
        out.push_back(std::move(e));
      }
    return out;
  }

  std::vector<std::string> list_in_file(const std::vector<Decl>& decls,
                                        const std::string& file) const {
    std::vector<const Decl*> hits;
    for (const Decl& d : decls)
      if (d.file.find(file) != std::string::npos) hits.push_back(&d);
    std::sort(hits.begin(), hits.end(), [](const Decl* a, const Decl* b) {
      return a->file != b->file ? a->file < b->file : a->start_line < b->start_line;
    });
    std::vector<std::string> out;
    for (const Decl* d : hits) out.push_back(d->name);
    return out;
  }

  void count_usage(const std::string& api) const {
    std::lock_guard<std::mutex> lock(usage_mutex_);
    ++usage_[api];
  }

  std::vector<std::pair<std::string, std::vector<std::string>>> file_lines_;
  std::vector<Decl> records_, functions_, symbols_;
  std::vector<Occurrence> occurrences_;
  std::map<std::string, std::vector<std::string>> callee_names_, caller_names_;
  mutable std::map<std::string, int> usage_;
  mutable std::mutex usage_mutex_;
};

}  // namespace waypoint::codeindex
