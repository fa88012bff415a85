#include "pbct/corpus_io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "pbct/errors.hpp"

namespace pbct {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; }

std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

}  // namespace

SequenceCorpus read_corpus(std::istream& in, CorpusFormat format, const std::optional<Vocabulary>& vocab) {
  if (format == CorpusFormat::kIntegers && !vocab) {
    throw InvalidParameter("integer corpora need a declared vocabulary size");
  }
  std::vector<std::string> labels;
  std::map<std::string, Symbol, std::less<>> index;
  std::vector<Sequence> sequences;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = split_tokens(line);
    if (tokens.empty()) continue;
    Sequence seq;
    seq.reserve(tokens.size());
    for (auto tok : tokens) {
      if (format == CorpusFormat::kIntegers) {
        int v = 0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || ptr != tok.data() + tok.size()) {
          throw ParseError(line_no, "'" + std::string(tok) + "' is not an integer symbol");
        }
        if (v < 1 || v > vocab->size()) {
          throw SymbolOutOfRange("line " + std::to_string(line_no) + ": symbol " + std::to_string(v) +
                                 " outside 1.." + std::to_string(vocab->size()));
        }
        seq.push_back(v);
      } else if (vocab) {
        auto s = vocab->lookup(std::string(tok));
        if (!s) {
          throw SymbolOutOfRange("line " + std::to_string(line_no) + ": unknown token '" + std::string(tok) + "'");
        }
        seq.push_back(*s);
      } else {
        auto it = index.find(tok);
        if (it == index.end()) {
          labels.emplace_back(tok);
          it = index.emplace(std::string(tok), static_cast<Symbol>(labels.size())).first;
        }
        seq.push_back(it->second);
      }
    }
    sequences.push_back(std::move(seq));
  }
  if (in.bad()) throw IoError("read failure");
  SequenceCorpus corpus;
  if (vocab) {
    corpus.vocab = *vocab;
  } else {
    if (labels.empty()) throw ParseError(line_no, "token corpus contains no symbols");
    corpus.vocab = Vocabulary(std::move(labels));
  }
  corpus.sequences = std::move(sequences);
  return corpus;
}

SequenceCorpus read_corpus(const std::filesystem::path& path, CorpusFormat format,
                           const std::optional<Vocabulary>& vocab) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus '" + path.string() + "'");
  return read_corpus(in, format, vocab);
}

void write_corpus(std::ostream& out, const SequenceCorpus& corpus) {
  for (const auto& seq : corpus.sequences) {
    for (std::size_t i = 0; i < seq.size(); ++i) {
      if (i) out << ' ';
      out << corpus.vocab.label(seq[i]);
    }
    out << '\n';
  }
}

void write_corpus(const std::filesystem::path& path, const SequenceCorpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write corpus '" + path.string() + "'");
  write_corpus(out, corpus);
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

std::string corpus_digest(const SequenceCorpus& corpus) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](std::uint64_t x) {
    for (int i = 0; i < 8; ++i) {
      h ^= (x >> (8 * i)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  feed(static_cast<std::uint64_t>(corpus.vocab.size()));
  for (const auto& seq : corpus.sequences) {
    feed(seq.size());
    for (Symbol s : seq) feed(static_cast<std::uint64_t>(s));
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

}  // namespace pbct
