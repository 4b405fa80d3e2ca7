#pragma once

#include <map>
#include <string>

namespace rtlmut {

// Named prompt templates with {placeholder} substitution. Built-in defaults
// ship with the library; a directory of <name>.txt files overrides them
// per-template. The default template texts also live under assets/prompts/
// for engineers to copy and edit.
class PromptLibrary {
 public:
  PromptLibrary();
  explicit PromptLibrary(const std::string& override_dir);

  std::string render(const std::string& template_name,
                     const std::map<std::string, std::string>& vars) const;

  bool has_template(const std::string& template_name) const;

 private:
  std::map<std::string, std::string> templates_;
};

}  // namespace rtlmut
