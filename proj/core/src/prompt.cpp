#include "multirag/prompt.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace multirag {

namespace {

constexpr std::string_view kNerTemplate =
    "Identify the named entities in the input text. Reply with a JSON array; "
    "each element is either a string or an object {\"label\": ..., "
    "\"type\": ...}.\n\nInput: {{input}}\nOutput:";

constexpr std::string_view kTripleTemplate =
    "Extract subject-predicate-object triples from the input text. Only use "
    "subjects and objects from the given entity list. Reply with one triple "
    "per line in the form (Subject, Predicate, Object), optionally followed "
    "by @<score>.\n\nInput: {{input}}\nOutput:";

constexpr std::string_view kStdTemplate =
    "Standardize the given entity names. Reply with a JSON object mapping "
    "each alias to its canonical name; omit names that are already "
    "canonical.\n\nInput: {{input}}\nOutput:";

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::io_error, "cannot open prompt file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string strip_trailing_newlines(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

}  // namespace

std::string_view to_string(PromptKind kind) {
  switch (kind) {
    case PromptKind::ner: return "ner";
    case PromptKind::triple: return "triple";
    case PromptKind::std_names: return "std";
  }
  return "ner";
}

std::string ExtractionPrompt::render(const std::string& input) const {
  std::string examples_block;
  for (const auto& [in, out] : examples)
    examples_block += "Input: " + in + "\nOutput: " + out + "\n\n";

  std::string body = instruction;
  if (auto pos = body.find("{{input}}"); pos != std::string::npos) {
    body.replace(pos, 9, input);
  } else {
    body += "\n\nInput: " + input + "\nOutput:";
  }
  return examples_block + body;
}

ExtractionPrompt parse_prompt(PromptKind kind, const std::string& text) {
  ExtractionPrompt prompt;
  prompt.kind = kind;

  std::istringstream in(text);
  std::string line;
  std::string* target = &prompt.instruction;
  std::string pending_input;
  bool in_output = false;

  auto flush_example = [&] {
    if (in_output) {
      prompt.examples.emplace_back(strip_trailing_newlines(pending_input),
                                   strip_trailing_newlines(*target));
      pending_input.clear();
    }
  };

  std::string output_buf;
  while (std::getline(in, line)) {
    if (line == "@example") {
      flush_example();
      in_output = false;
      pending_input.clear();
      output_buf.clear();
      target = &pending_input;
      continue;
    }
    if (line == "@output") {
      in_output = true;
      output_buf.clear();
      target = &output_buf;
      continue;
    }
    target->append(line);
    target->push_back('\n');
  }
  flush_example();
  prompt.instruction = strip_trailing_newlines(prompt.instruction);
  return prompt;
}

ExtractionPrompt load_prompt(PromptKind kind, const std::string& path) {
  return parse_prompt(kind, read_file(path));
}

PromptSet builtin_prompts() {
  PromptSet set;
  set.ner = parse_prompt(PromptKind::ner, std::string(kNerTemplate));
  set.triple = parse_prompt(PromptKind::triple, std::string(kTripleTemplate));
  set.standardize = parse_prompt(PromptKind::std_names, std::string(kStdTemplate));
  return set;
}

PromptSet load_prompt_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  PromptSet set = builtin_prompts();
  if (fs::exists(fs::path(dir) / "ner.prompt"))
    set.ner = load_prompt(PromptKind::ner, (fs::path(dir) / "ner.prompt").string());
  if (fs::exists(fs::path(dir) / "triple.prompt"))
    set.triple =
        load_prompt(PromptKind::triple, (fs::path(dir) / "triple.prompt").string());
  if (fs::exists(fs::path(dir) / "std.prompt"))
    set.standardize = load_prompt(PromptKind::std_names, (fs::path(dir) / "std.prompt").string());
  return set;
}

std::string render_logic_form_prompt(const std::string& query) {
  return "Extract the entities, relations and intent from the query. Reply "
         "with a JSON object {\"entities\": [...], \"relations\": [...], "
         "\"intent\": \"...\"}.\n\nQuery: " +
         query + "\nOutput:";
}

std::string render_authority_prompt(const std::string& triple_text,
                                    const std::string& source,
                                    const std::string& group_context) {
  return "Rate the authority of the following claim given its source and the "
         "competing claims. Reply with a single decimal in [-10, 10] on the "
         "first line.\n\nClaim: " +
         triple_text + "\nSource: " + source +
         "\nCompeting claims:\n" + group_context + "\nScore:";
}

std::string render_answer_prompt(const std::string& query,
                                 const std::string& context) {
  return "Answer the query using only the trusted evidence below. Mention "
         "conflicting claims only to dismiss them.\n\n" +
         context + "\nQuery: " + query + "\nAnswer:";
}

}  // namespace multirag
