#include "codetect/semparse.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>

#include "codetect/error.hpp"
#include "codetect/predicates.hpp"

namespace codetect::semparse {

namespace {

std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::string join(const std::vector<std::string>& words, std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (i > begin) out.push_back(' ');
    out += words[i];
  }
  return out;
}

std::string join(const std::vector<std::string>& words) { return join(words, 0, words.size()); }

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_tag(std::string_view s) {
  if (s.empty()) return false;
  if (s == "," || s == ".") return true;
  if (!std::isupper(static_cast<unsigned char>(s[0]))) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isupper(static_cast<unsigned char>(c)) || c == '$';
  });
}

bool is_punct_token(std::string_view s) { return s == "," || s == "."; }

bool is_noun_tag(std::string_view tag) { return tag.rfind("NN", 0) == 0; }
bool is_verb_tag(std::string_view tag) { return tag.rfind("VB", 0) == 0; }

std::vector<std::string> token_words(const std::vector<Token>& tokens) {
  std::vector<std::string> words;
  for (const auto& t : tokens) {
    for (auto& w : split_words(t.text)) words.push_back(std::move(w));
  }
  return words;
}

}  // namespace

// ---------------------------------------------------------------- Lexicon

void Lexicon::add_word(const std::string& phrase, std::vector<std::string> tags) {
  auto words = split_words(phrase);
  max_phrase_words_ = std::max(max_phrase_words_, words.size());
  for (auto& w : words) vocabulary_.insert(w);
  auto& slot = entries_[join(words)];
  for (auto& t : tags) {
    if (std::find(slot.begin(), slot.end(), t) == slot.end()) slot.push_back(std::move(t));
  }
}

void Lexicon::add_override(const std::string& phrase, const std::string& tag) {
  auto words = split_words(phrase);
  max_phrase_words_ = std::max(max_phrase_words_, words.size());
  for (auto& w : words) vocabulary_.insert(w);
  overrides_[join(words)] = tag;
}

void Lexicon::add_suffix_rule(char pos, SuffixRule rule) {
  (pos == 'N' ? noun_rules_ : verb_rules_).push_back(std::move(rule));
}

void Lexicon::add_synonym_group(SynonymGroup group) {
  for (auto& p : group.phrases) p = join(split_words(p));
  group.canonical = join(split_words(group.canonical));
  if (std::find(group.phrases.begin(), group.phrases.end(), group.canonical) ==
      group.phrases.end()) {
    group.phrases.insert(group.phrases.begin(), group.canonical);
  }
  synonyms_.push_back(std::move(group));
}

const std::vector<std::string>* Lexicon::tags(const std::string& phrase) const {
  auto it = entries_.find(phrase);
  return it == entries_.end() ? nullptr : &it->second;
}

std::int64_t Lexicon::frequency(const std::string& word) const {
  auto it = frequency_.find(word);
  return it == frequency_.end() ? 0 : it->second;
}

bool Lexicon::is_base_form(const std::string& word, char pos) const {
  const std::string base = pos == 'N' ? "NN" : "VB";
  if (const auto* t = tags(word)) {
    if (std::find(t->begin(), t->end(), base) != t->end()) return true;
  }
  auto it = overrides_.find(word);
  return it != overrides_.end() && it->second == base;
}

// WordNet-morphy style: exception table, then detachment rules whose result
// must be a known base form; the shortest surviving candidate wins.
std::string Lexicon::lemma(const std::string& word, char pos) const {
  if (auto it = lemma_exceptions_.find(word); it != lemma_exceptions_.end()) return it->second;
  std::optional<std::string> best;
  if (is_base_form(word, pos)) best = word;
  for (const auto& rule : pos == 'N' ? noun_rules_ : verb_rules_) {
    if (word.size() <= rule.suffix.size()) continue;
    if (word.compare(word.size() - rule.suffix.size(), rule.suffix.size(), rule.suffix) != 0) {
      continue;
    }
    std::string cand = word.substr(0, word.size() - rule.suffix.size()) + rule.replacement;
    if (is_base_form(cand, pos) && (!best || cand.size() < best->size())) best = cand;
  }
  return best.value_or(word);
}

// ---------------------------------------------------------------- rules

std::size_t TemplateRule::specificity() const {
  return static_cast<std::size_t>(
      std::count_if(pattern.begin(), pattern.end(), [](const std::string& e) { return e != "*"; }));
}

std::string TemplateRule::pattern_text() const { return join(pattern); }

const ObjectInstance* PredicateConjunction::instance(std::string_view id) const {
  for (const auto& inst : instances) {
    if (inst.id == id) return &inst;
  }
  return nullptr;
}

std::string PredicateConjunction::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (i > 0) out += " & ";
    out += atoms[i].predicate + "(";
    for (std::size_t j = 0; j < atoms[i].args.size(); ++j) {
      if (j > 0) out += ",";
      out += atoms[i].args[j];
    }
    out += ")";
  }
  return out;
}

namespace {

[[noreturn]] void malformed(std::string_view source, int line, const std::string& msg) {
  throw Error(ErrorCode::MalformedRules, std::string(source) + ":" + std::to_string(line) + ": " + msg);
}

Atom parse_atom(std::string_view text, std::string_view source, int line) {
  const std::string s = trim(text);
  const auto open = s.find('(');
  if (open == std::string::npos || s.back() != ')') malformed(source, line, "bad atom '" + s + "'");
  Atom atom;
  atom.predicate = trim(s.substr(0, open));
  std::string inner = s.substr(open + 1, s.size() - open - 2);
  std::stringstream ss(inner);
  std::string arg;
  while (std::getline(ss, arg, ',')) {
    arg = trim(arg);
    if (arg.size() < 2 || arg[0] != '?') malformed(source, line, "atom argument must be ?var");
    atom.args.push_back(arg);
  }
  const auto arity = predicate_arity(atom.predicate);
  if (!arity) malformed(source, line, "unknown predicate '" + atom.predicate + "'");
  if (static_cast<std::size_t>(*arity) != atom.args.size()) {
    malformed(source, line, "predicate '" + atom.predicate + "' takes " +
                                std::to_string(*arity) + " argument(s)");
  }
  return atom;
}

TemplateRule parse_template(std::string_view text, std::string_view source, int line) {
  TemplateRule rule;
  rule.line = line;
  std::string s = trim(text);
  if (s.rfind("rank", 0) == 0) {
    const auto colon = s.find(':');
    if (colon == std::string::npos) malformed(source, line, "rank prefix needs ':'");
    try {
      rule.rank = std::stoi(trim(s.substr(4, colon - 4)));
    } catch (const std::exception&) {
      malformed(source, line, "bad rank");
    }
    s = trim(s.substr(colon + 1));
  }
  const auto arrow = s.find("=>");
  if (arrow == std::string::npos) malformed(source, line, "template needs '=>'");
  rule.pattern = split_words(lowercase(s.substr(0, arrow)));
  if (rule.pattern.empty()) malformed(source, line, "empty template pattern");
  std::set<std::string> vars;
  for (const auto& e : rule.pattern) {
    if (e[0] == '?') {
      if (e.size() < 2) malformed(source, line, "empty variable name");
      if (!vars.insert(e).second) malformed(source, line, "variable " + e + " repeated in pattern");
    }
  }
  std::string rhs = s.substr(arrow + 2);
  std::size_t start = 0;
  while (start <= rhs.size()) {
    auto amp = rhs.find('&', start);
    if (amp == std::string::npos) amp = rhs.size();
    const std::string part = trim(rhs.substr(start, amp - start));
    if (part.empty()) malformed(source, line, "empty conjunct");
    rule.output.push_back(parse_atom(part, source, line));
    start = amp + 1;
  }
  for (const auto& atom : rule.output) {
    for (const auto& a : atom.args) {
      if (!vars.count(a)) malformed(source, line, "output variable " + a + " not bound in pattern");
    }
  }
  return rule;
}

}  // namespace

const std::set<std::string>& default_filtered_tags() {
  static const std::set<std::string> tags = {"PRP$", "RB", ",", ".", "JJ", "CC", "CD", "DT", "JJR"};
  return tags;
}

RuleSet parse_rules(std::string_view text, std::string_view source) {
  RuleSet rules;
  rules.name = std::string(source);
  std::string section;
  bool saw_version = false;
  bool saw_filter = false;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') malformed(source, line_no, "unterminated section header");
      section = line.substr(1, line.size() - 2);
      static const std::set<std::string> known = {"lexicon", "overrides", "frequency", "lemmas",
                                                  "suffixes", "filter", "synonyms", "templates"};
      if (!known.count(section)) malformed(source, line_no, "unknown section [" + section + "]");
      continue;
    }
    if (section.empty()) {
      auto words = split_words(line);
      if (words.size() == 2 && words[0] == "version") {
        if (words[1] != "1") malformed(source, line_no, "unsupported rule-file version " + words[1]);
        saw_version = true;
        continue;
      }
      malformed(source, line_no, "content outside of a section");
    }
    if (section == "templates") {
      rules.templates.push_back(parse_template(line, source, line_no));
      continue;
    }
    if (section == "synonyms") {
      const auto eq = line.find('=');
      if (eq == std::string::npos) malformed(source, line_no, "synonym group needs '='");
      SynonymGroup group;
      std::string lhs = trim(line.substr(0, eq));
      if (auto slash = lhs.find('/'); slash != std::string::npos) {
        group.tag = trim(lhs.substr(slash + 1));
        lhs = trim(lhs.substr(0, slash));
        if (!is_tag(group.tag)) malformed(source, line_no, "bad synonym tag");
      }
      if (lhs.empty()) malformed(source, line_no, "synonym group needs a canonical form");
      group.canonical = lowercase(lhs);
      std::string rhs = line.substr(eq + 1);
      std::stringstream ss(rhs);
      std::string phrase;
      while (std::getline(ss, phrase, '|')) {
        phrase = lowercase(trim(phrase));
        if (phrase.empty()) malformed(source, line_no, "empty synonym phrase");
        group.phrases.push_back(phrase);
      }
      rules.lexicon.add_synonym_group(std::move(group));
      continue;
    }
    auto words = split_words(line);
    if (section == "lexicon") {
      std::size_t split = words.size();
      while (split > 0 && is_tag(words[split - 1])) --split;
      if (split == 0 || split == words.size()) {
        malformed(source, line_no, "lexicon entry needs words followed by tags");
      }
      rules.lexicon.add_word(lowercase(join(words, 0, split)),
                             std::vector<std::string>(words.begin() + static_cast<long>(split), words.end()));
    } else if (section == "overrides") {
      if (words.size() < 2 || !is_tag(words.back())) malformed(source, line_no, "override needs phrase and tag");
      rules.lexicon.add_override(lowercase(join(words, 0, words.size() - 1)), words.back());
    } else if (section == "frequency") {
      if (words.size() != 2) malformed(source, line_no, "frequency entry is 'word count'");
      try {
        rules.lexicon.set_frequency(lowercase(words[0]), std::stoll(words[1]));
      } catch (const std::exception&) {
        malformed(source, line_no, "bad frequency count");
      }
    } else if (section == "lemmas") {
      if (words.size() != 2) malformed(source, line_no, "lemma exception is 'word lemma'");
      rules.lexicon.add_lemma_exception(lowercase(words[0]), lowercase(words[1]));
    } else if (section == "suffixes") {
      if (words.size() != 3 || (words[0] != "NN" && words[0] != "VB")) {
        malformed(source, line_no, "suffix rule is 'NN|VB suffix replacement' ('-' for none)");
      }
      rules.lexicon.add_suffix_rule(words[0] == "NN" ? 'N' : 'V',
                                    {words[1], words[2] == "-" ? "" : words[2]});
    } else if (section == "filter") {
      saw_filter = true;
      for (auto& w : words) {
        if (!is_tag(w)) malformed(source, line_no, "bad tag '" + w + "' in filter");
        rules.filtered_tags.insert(w);
      }
    }
  }
  if (!saw_version) malformed(source, line_no, "missing 'version 1' header");
  if (!saw_filter) rules.filtered_tags = default_filtered_tags();
  std::stable_sort(rules.templates.begin(), rules.templates.end(),
                   [](const TemplateRule& a, const TemplateRule& b) {
                     if (a.specificity() != b.specificity()) return a.specificity() > b.specificity();
                     if (a.rank != b.rank) return a.rank > b.rank;
                     return a.pattern_text() < b.pattern_text();
                   });
  return rules;
}

RuleSet load_rules(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open rule file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_rules(ss.str(), path.string());
}

RuleSet builtin_rules(std::string_view name) {
  const auto text = builtin_rules_text(name);
  if (text.empty()) throw Error(ErrorCode::InvalidArgument, "no builtin rule set '" + std::string(name) + "'");
  return parse_rules(text, name);
}

RuleSet resolve_rules(std::string_view name_or_path) {
  if (!builtin_rules_text(name_or_path).empty()) return builtin_rules(name_or_path);
  return load_rules(std::filesystem::path(name_or_path));
}

// ---------------------------------------------------------------- steps

std::vector<std::string> tokenize(std::string_view sentence) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (char raw : sentence) {
    const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(raw)));
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else if (c == ',') {
      flush();
      out.emplace_back(",");
    } else if (c == '.' || c == '!' || c == '?' || c == ';' || c == ':') {
      flush();
      out.emplace_back(".");
    } else if (c == '"' || c == '(' || c == ')') {
      flush();
    } else {
      cur.push_back(c);
    }
  }
  flush();
  return out;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::vector<std::string> correct_spelling(const std::vector<std::string>& tokens,
                                          const Lexicon& lexicon) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  const auto& vocab = lexicon.vocabulary();
  for (const auto& tok : tokens) {
    if (is_punct_token(tok) || vocab.count(tok)) {
      out.push_back(tok);
      continue;
    }
    const std::string* best = nullptr;
    std::size_t best_dist = 3;
    std::int64_t best_freq = 0;
    // vocab iterates lexicographically, so strict comparisons keep the
    // alphabetically first word among equal (distance, frequency).
    for (const auto& word : vocab) {
      const auto len_gap = word.size() > tok.size() ? word.size() - tok.size() : tok.size() - word.size();
      if (len_gap > 2) continue;
      const std::size_t d = edit_distance(tok, word);
      if (d > 2) continue;
      const std::int64_t f = lexicon.frequency(word);
      if (d < best_dist || (d == best_dist && f > best_freq)) {
        best = &word;
        best_dist = d;
        best_freq = f;
      }
    }
    out.push_back(best ? *best : tok);
  }
  return out;
}

std::vector<Token> pos_tag(const std::vector<std::string>& tokens, const Lexicon& lexicon) {
  std::vector<Token> tagged;
  const std::size_t max_words = lexicon.max_phrase_words();
  // Step 2: greedy longest-first lookup.
  for (std::size_t i = 0; i < tokens.size();) {
    if (is_punct_token(tokens[i])) {
      tagged.push_back({tokens[i], tokens[i]});
      ++i;
      continue;
    }
    bool matched = false;
    for (std::size_t n = std::min(max_words, tokens.size() - i); n >= 1; --n) {
      const std::string phrase = join(tokens, i, i + n);
      const auto* tags = lexicon.tags(phrase);
      std::string tag;
      if (tags && !tags->empty()) {
        tag = tags->front();
      } else if (n > 1 && lexicon.overrides().count(phrase)) {
        tag = lexicon.overrides().at(phrase);
      } else {
        continue;
      }
      tagged.push_back({phrase, tag});
      i += n;
      matched = true;
      break;
    }
    if (!matched) throw Error(ErrorCode::UnknownWord, "'" + tokens[i] + "' is not in the lexicon");
  }
  // Step 3: overrides retag and may merge adjacent tokens.
  const auto& overrides = lexicon.overrides();
  if (overrides.empty()) return tagged;
  std::vector<Token> out;
  for (std::size_t i = 0; i < tagged.size();) {
    bool merged = false;
    for (std::size_t n = std::min(max_words, tagged.size() - i); n >= 1; --n) {
      std::string phrase;
      for (std::size_t k = i; k < i + n; ++k) {
        if (k > i) phrase.push_back(' ');
        phrase += tagged[k].text;
      }
      auto it = overrides.find(phrase);
      if (it == overrides.end()) continue;
      out.push_back({phrase, it->second});
      i += n;
      merged = true;
      break;
    }
    if (!merged) out.push_back(tagged[i++]);
  }
  return out;
}

std::vector<Token> filter_pos(const std::vector<Token>& tokens,
                              const std::set<std::string>& filtered_tags) {
  std::vector<Token> out;
  for (const auto& t : tokens) {
    if (!filtered_tags.count(t.tag)) out.push_back(t);
  }
  return out;
}

std::vector<Token> lemmatize(const std::vector<Token>& tokens, const Lexicon& lexicon) {
  std::vector<Token> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    const bool noun = is_noun_tag(t.tag);
    const bool verb = is_verb_tag(t.tag);
    if (!noun && !verb) {
      out.push_back(t);
      continue;
    }
    auto words = split_words(t.text);
    // Nouns inflect on the head (last) word, verbs on the first.
    auto& w = noun ? words.back() : words.front();
    w = lexicon.lemma(w, noun ? 'N' : 'V');
    out.push_back({join(words), noun ? "NN" : "VB"});
  }
  return out;
}

std::vector<Token> conflate_synonyms(const std::vector<Token>& tokens, const Lexicon& lexicon) {
  struct Candidate {
    std::vector<std::string> words;
    const SynonymGroup* group;
  };
  std::vector<Candidate> phrases;
  for (const auto& g : lexicon.synonym_groups()) {
    for (const auto& p : g.phrases) phrases.push_back({split_words(p), &g});
  }
  // Longest phrase first; ties in file order.
  std::stable_sort(phrases.begin(), phrases.end(), [](const Candidate& a, const Candidate& b) {
    return a.words.size() > b.words.size();
  });

  std::vector<Token> out;
  for (std::size_t i = 0; i < tokens.size();) {
    bool replaced = false;
    for (const auto& cand : phrases) {
      // Collect whole tokens i..j whose words spell the phrase exactly.
      std::vector<std::string> words;
      std::size_t j = i;
      while (j < tokens.size() && words.size() < cand.words.size()) {
        for (auto& w : split_words(tokens[j].text)) words.push_back(std::move(w));
        ++j;
      }
      if (words != cand.words) continue;
      std::string tag = cand.group->tag;
      if (tag.empty()) {
        tag = tokens[i].tag;
        for (std::size_t k = i; k < j; ++k) {
          if (is_noun_tag(tokens[k].tag)) tag = "NN";
        }
      }
      out.push_back({cand.group->canonical, tag});
      i = j;
      replaced = true;
      break;
    }
    if (!replaced) out.push_back(tokens[i++]);
  }
  return out;
}

namespace {

// Position in the token stream: token index plus word offset inside it.
struct Cursor {
  std::size_t token = 0;
  std::size_t word = 0;
};

using Bindings = std::vector<std::pair<std::string, std::size_t>>;  // variable -> token index

bool match_from(const std::vector<std::string>& pattern, std::size_t pi,
                const std::vector<std::vector<std::string>>& words,
                const std::vector<Token>& tokens, Cursor at, Bindings& bindings) {
  if (pi == pattern.size()) return at.token == tokens.size() && at.word == 0;
  const std::string& elem = pattern[pi];
  if (elem == "*") {
    if (at.word != 0) return false;
    for (std::size_t skip = at.token; skip <= tokens.size(); ++skip) {
      if (match_from(pattern, pi + 1, words, tokens, {skip, 0}, bindings)) return true;
    }
    return false;
  }
  if (at.token >= tokens.size()) return false;
  if (elem[0] == '?') {
    if (at.word != 0 || !is_noun_tag(tokens[at.token].tag)) return false;
    bindings.emplace_back(elem, at.token);
    if (match_from(pattern, pi + 1, words, tokens, {at.token + 1, 0}, bindings)) return true;
    bindings.pop_back();
    return false;
  }
  const auto& tok_words = words[at.token];
  if (tok_words[at.word] != elem) return false;
  Cursor next = at;
  if (++next.word == tok_words.size()) {
    next.word = 0;
    ++next.token;
  }
  return match_from(pattern, pi + 1, words, tokens, next, bindings);
}

}  // namespace

PredicateConjunction match_templates(const std::vector<Token>& tokens,
                                     const std::vector<TemplateRule>& rules) {
  std::vector<std::vector<std::string>> words;
  words.reserve(tokens.size());
  for (const auto& t : tokens) words.push_back(split_words(t.text));

  for (const auto& rule : rules) {
    Bindings bindings;
    if (!match_from(rule.pattern, 0, words, tokens, {}, bindings)) continue;

    std::set<std::string> used;
    for (const auto& atom : rule.output) used.insert(atom.args.begin(), atom.args.end());

    PredicateConjunction conj;
    std::map<std::string, std::string> var_to_id;
    std::map<std::string, int> noun_count;
    for (const auto& [var, tok] : bindings) {
      if (!used.count(var)) continue;
      const std::string& noun = tokens[tok].text;
      const int n = ++noun_count[noun];
      const std::string id = n == 1 ? noun : noun + "#" + std::to_string(n);
      var_to_id[var] = id;
      conj.instances.push_back({id, noun});
    }
    for (const auto& atom : rule.output) {
      Atom a{atom.predicate, {}};
      for (const auto& v : atom.args) a.args.push_back(var_to_id.at(v));
      conj.atoms.push_back(std::move(a));
    }
    return conj;
  }
  std::string canon;
  for (const auto& t : tokens) {
    if (!canon.empty()) canon.push_back(' ');
    canon += t.text;
  }
  throw Error(ErrorCode::NoTemplateMatch, "no template matches '" + canon + "'");
}

namespace {

std::vector<Token> run_steps(std::string_view sentence, const RuleSet& rules) {
  const auto raw = tokenize(sentence);
  if (raw.empty()) return {};
  const auto spelled = correct_spelling(raw, rules.lexicon);
  const auto tagged = pos_tag(spelled, rules.lexicon);
  const auto filtered = filter_pos(tagged, rules.filtered_tags);
  const auto lemmas = lemmatize(filtered, rules.lexicon);
  return conflate_synonyms(lemmas, rules.lexicon);
}

}  // namespace

std::string canonicalize(std::string_view sentence, const RuleSet& rules) {
  return join(token_words(run_steps(sentence, rules)));
}

PredicateConjunction parse_sentence(std::string_view sentence, const RuleSet& rules) {
  auto conj = match_templates(run_steps(sentence, rules), rules.templates);
  conj.sentence = std::string(sentence);
  return conj;
}

}  // namespace codetect::semparse
