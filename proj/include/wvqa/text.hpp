#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace wvqa::text {

/// ASCII lowercase; bytes outside A-Z pass through untouched.
std::string to_lower(std::string_view s);

/// Trim ASCII whitespace from both ends.
std::string_view trim(std::string_view s);

/// Collapse runs of whitespace to single spaces and trim.
std::string normalize_whitespace(std::string_view s);

/// Split into words on ASCII whitespace. This is the counting rule used for
/// dataset statistics and the response token budget.
std::vector<std::string> whitespace_words(std::string_view s);

/// Metric tokenizer shared by BLEU/ROUGE: lowercase, then split on whitespace
/// with ASCII punctuation emitted as separate single-char tokens. Input is
/// assumed to already be in Unicode NFC form; non-ASCII bytes are kept inside
/// word tokens.
std::vector<std::string> metric_tokens(std::string_view s);

/// Word tokens for bag-of-words embeddings: lowercased maximal runs of
/// alphanumeric bytes (punctuation dropped entirely).
std::vector<std::string> word_tokens(std::string_view s);

/// Split into sentences on newlines and terminal punctuation (. ! ?).
/// Empty sentences are dropped; the terminal punctuation stays attached.
std::vector<std::string> split_sentences(std::string_view s);

}  // namespace wvqa::text
