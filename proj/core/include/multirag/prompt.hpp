#pragma once

#include <string>
#include <utility>
#include <vector>

#include "multirag/client.hpp"

namespace multirag {

enum class PromptKind { ner, triple, std_names };

std::string_view to_string(PromptKind kind);

// Instruction template with demonstration pairs. The template carries an
// "{{input}}" slot; examples are rendered as Input/Output blocks before it.
struct ExtractionPrompt {
  PromptKind kind = PromptKind::ner;
  std::string instruction;
  std::vector<std::pair<std::string, std::string>> examples;

  std::string render(const std::string& input) const;
};

// Parses a .prompt file: instruction text up to the first "@example" line,
// then alternating example bodies split by "@output" markers.
ExtractionPrompt parse_prompt(PromptKind kind, const std::string& text);
ExtractionPrompt load_prompt(PromptKind kind, const std::string& path);

// Loads {ner,triple,std}.prompt from a directory; missing files fall back
// to the built-in templates.
struct PromptSet {
  ExtractionPrompt ner;
  ExtractionPrompt triple;
  ExtractionPrompt standardize;
};

PromptSet builtin_prompts();
PromptSet load_prompt_dir(const std::string& dir);

// Built-in templates for pipeline-side prompts.
std::string render_logic_form_prompt(const std::string& query);
std::string render_authority_prompt(const std::string& triple_text,
                                    const std::string& source,
                                    const std::string& group_context);
std::string render_answer_prompt(const std::string& query,
                                 const std::string& context);

}  // namespace multirag
