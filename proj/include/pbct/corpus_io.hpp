#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "pbct/core_model.hpp"

namespace pbct {

enum class CorpusFormat {
  /// Whitespace-separated tokens; vocabulary built in first-appearance order.
  kTokens,
  /// Whitespace-separated 1-based symbol ids against a declared V.
  kIntegers,
};

/// One sequence per non-empty line. For kTokens, a supplied vocabulary fixes
/// the label mapping and unknown tokens are SymbolOutOfRange; for kIntegers
/// the vocabulary is required.
SequenceCorpus read_corpus(std::istream& in, CorpusFormat format, const std::optional<Vocabulary>& vocab = {});
SequenceCorpus read_corpus(const std::filesystem::path& path, CorpusFormat format,
                           const std::optional<Vocabulary>& vocab = {});

/// Writes labels when the vocabulary has them, integer ids otherwise.
void write_corpus(std::ostream& out, const SequenceCorpus& corpus);
void write_corpus(const std::filesystem::path& path, const SequenceCorpus& corpus);

/// FNV-1a over sequence lengths and symbols, as 16 hex digits.
std::string corpus_digest(const SequenceCorpus& corpus);

}  // namespace pbct
