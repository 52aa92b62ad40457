#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "llm4grn/common.hpp"

namespace llm4grn {

struct AnswerParseError : Error {
    using Error::Error;
};
struct MissingTagsError : AnswerParseError {
    using AnswerParseError::AnswerParseError;
};
struct EmptyAnswerError : AnswerParseError {
    using AnswerParseError::AnswerParseError;
};

// Extracts the gene list from a model reply. The reply must contain an
// <Answer>...</Answer> block; inside it, an optional bracketed,
// comma-separated list. Symbols are trimmed, uppercased, and deduplicated
// keeping first occurrence. Text outside the tags is ignored.
std::vector<std::string> parse_answer(std::string_view reply);

// Start offsets of sliding windows over a list of the given length. The
// final window is aligned to the end when the strided walk leaves a
// remainder, so every element is covered and no window exceeds the list.
std::vector<std::size_t> window_starts(std::size_t length, std::size_t window,
                                       std::size_t stride);

}  // namespace llm4grn
