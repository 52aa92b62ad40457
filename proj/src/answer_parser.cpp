#include "llm4grn/answer_parser.hpp"

#include <algorithm>

namespace llm4grn {

std::vector<std::string> parse_answer(std::string_view reply) {
    static constexpr std::string_view kOpen = "<Answer>";
    static constexpr std::string_view kClose = "</Answer>";

    const auto open = reply.find(kOpen);
    if (open == std::string_view::npos)
        throw MissingTagsError("reply has no <Answer> tag");
    const auto begin = open + kOpen.size();
    const auto close = reply.find(kClose, begin);
    if (close == std::string_view::npos)
        throw MissingTagsError("reply has no closing </Answer> tag");

    std::string_view body = trim_view(reply.substr(begin, close - begin));
    if (!body.empty() && body.front() == '[') body.remove_prefix(1);
    if (!body.empty() && body.back() == ']') body.remove_suffix(1);

    std::vector<std::string> genes;
    for (std::string_view token : split(body, ',')) {
        std::string symbol = normalize_symbol(token);
        if (symbol.empty()) continue;
        if (std::find(genes.begin(), genes.end(), symbol) == genes.end())
            genes.push_back(std::move(symbol));
    }
    if (genes.empty()) throw EmptyAnswerError("answer block lists no gene symbols");
    return genes;
}

std::vector<std::size_t> window_starts(std::size_t length, std::size_t window,
                                       std::size_t stride) {
    if (length == 0) throw Error("cannot window an empty list");
    if (window == 0 || stride == 0) throw Error("window and stride must be positive");
    if (window >= length) return {0};

    std::vector<std::size_t> starts;
    for (std::size_t s = 0; s + window <= length; s += stride) starts.push_back(s);
    if (starts.back() + window < length) starts.push_back(length - window);
    return starts;
}

}  // namespace llm4grn
