#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace codetect::semparse {

// A word or merged phrase with its part-of-speech tag.
struct Token {
  std::string text;
  std::string tag;

  friend bool operator==(const Token&, const Token&) = default;
};

struct SynonymGroup {
  std::string canonical;
  std::string tag;  // forced tag of the merged token; empty = derived
  std::vector<std::string> phrases;  // includes the canonical form
};

struct SuffixRule {
  std::string suffix;
  std::string replacement;
};

class Lexicon {
 public:
  // Tags in priority order.
  void add_word(const std::string& phrase, std::vector<std::string> tags);
  void add_override(const std::string& phrase, const std::string& tag);
  void set_frequency(const std::string& word, std::int64_t count) { frequency_[word] = count; }
  void add_lemma_exception(const std::string& word, const std::string& lemma) {
    lemma_exceptions_[word] = lemma;
  }
  void add_suffix_rule(char pos, SuffixRule rule);
  void add_synonym_group(SynonymGroup group);

  const std::vector<std::string>* tags(const std::string& phrase) const;
  const std::map<std::string, std::string>& overrides() const { return overrides_; }
  const std::set<std::string>& vocabulary() const { return vocabulary_; }
  std::int64_t frequency(const std::string& word) const;
  const std::vector<SynonymGroup>& synonym_groups() const { return synonyms_; }
  // Base form of a noun ('N') or verb ('V').
  std::string lemma(const std::string& word, char pos) const;
  std::size_t max_phrase_words() const { return max_phrase_words_; }

 private:
  bool is_base_form(const std::string& word, char pos) const;

  std::map<std::string, std::vector<std::string>> entries_;
  std::map<std::string, std::string> overrides_;
  std::set<std::string> vocabulary_;
  std::map<std::string, std::int64_t> frequency_;
  std::map<std::string, std::string> lemma_exceptions_;
  std::vector<SuffixRule> noun_rules_;
  std::vector<SuffixRule> verb_rules_;
  std::vector<SynonymGroup> synonyms_;
  std::size_t max_phrase_words_ = 1;
};

// Predicate application; arguments are template variables inside rules and
// instance ids inside conjunctions.
struct Atom {
  std::string predicate;
  std::vector<std::string> args;

  friend bool operator==(const Atom&, const Atom&) = default;
};

struct TemplateRule {
  std::vector<std::string> pattern;  // literal words, ?variables, or *
  std::vector<Atom> output;
  int rank = 0;
  int line = 0;

  std::size_t specificity() const;
  std::string pattern_text() const;
};

struct ObjectInstance {
  std::string id;
  std::string class_noun;

  friend bool operator==(const ObjectInstance&, const ObjectInstance&) = default;
};

struct PredicateConjunction {
  std::vector<ObjectInstance> instances;
  std::vector<Atom> atoms;
  std::string sentence;

  const ObjectInstance* instance(std::string_view id) const;
  std::string to_string() const;  // e.g. "moveDown(cup) & nearEnd(cup,bowl)"
};

struct RuleSet {
  std::string name;
  Lexicon lexicon;
  std::set<std::string> filtered_tags;
  std::vector<TemplateRule> templates;  // sorted most-specific first
};

// Rule-file text -> rules. Throws Error(MalformedRules) with "source:line".
RuleSet parse_rules(std::string_view text, std::string_view source = "<rules>");
RuleSet load_rules(const std::filesystem::path& path);
// "new_dataset" or "cad120"; empty view for unknown names.
std::string_view builtin_rules_text(std::string_view name);
RuleSet builtin_rules(std::string_view name);
// Builtin name, or a path to a rule file.
RuleSet resolve_rules(std::string_view name_or_path);

std::vector<std::string> tokenize(std::string_view sentence);

// Step 1: nearest in-vocabulary word within edit distance 2.
std::vector<std::string> correct_spelling(const std::vector<std::string>& tokens,
                                          const Lexicon& lexicon);
std::size_t edit_distance(std::string_view a, std::string_view b);
// Steps 2-3: lexicon tagging then override rules.
std::vector<Token> pos_tag(const std::vector<std::string>& tokens, const Lexicon& lexicon);
// Step 4.
std::vector<Token> filter_pos(const std::vector<Token>& tokens,
                              const std::set<std::string>& filtered_tags);
const std::set<std::string>& default_filtered_tags();
// Step 5.
std::vector<Token> lemmatize(const std::vector<Token>& tokens, const Lexicon& lexicon);
// Step 6.
std::vector<Token> conflate_synonyms(const std::vector<Token>& tokens, const Lexicon& lexicon);
// Step 7.
PredicateConjunction match_templates(const std::vector<Token>& tokens,
                                     const std::vector<TemplateRule>& rules);

// Steps 1-6 joined back into a word string.
std::string canonicalize(std::string_view sentence, const RuleSet& rules);
PredicateConjunction parse_sentence(std::string_view sentence, const RuleSet& rules);

}  // namespace codetect::semparse
