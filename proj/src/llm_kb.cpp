#include "llm4grn/llm_kb.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

namespace llm4grn {

namespace {

constexpr std::string_view kTfExtractionText =
    "We need to find transcriptomic factors related to {CONTEXT} out of given genes. "
    "What are the transcriptomic factors genes out of {LIST-OF-TFs}. Which of these can "
    "be transcriptomic factors? Do not include any TFs beyond these. Give potential "
    "candidates. Return the answer in the format <Answer> [first suggestion, second "
    "suggestion, third suggestion, fourth suggestion and so on....] </Answer>. Describe "
    "the reasoning first and then return answer in requested format with the potential "
    "TFs.";

constexpr std::string_view kRegulatorSelectionText =
    "We need to find transcriptomic factors related to {CONTEXT}. What are the "
    "transcriptomic factors genes related to {GENE-X} out of {LIST-OF-TFs}. Which of "
    "these {K} TFs have a causal relationship with {GENE-X} gene? Do not include any "
    "genes beyond these. Give potential candidates. Think step by step and return the "
    "answer in the format <Answer> [first suggestion, second suggestion, third "
    "suggestion, fourth suggestion and so on....] </Answer>. You have to return the {K} "
    "potential TFs that are related to the give gene only, otherwise your answer will "
    "be disqualified.";

void replace_all(std::string& text, std::string_view placeholder, std::string_view value) {
    std::size_t pos = 0;
    while ((pos = text.find(placeholder, pos)) != std::string::npos) {
        text.replace(pos, placeholder.size(), value);
        pos += value.size();
    }
}

std::string join_symbols(const std::vector<std::string>& symbols) {
    std::string joined;
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        if (i) joined += ", ";
        joined += symbols[i];
    }
    return joined;
}

// One query with the parse-retry loop. Each attempt is a distinct request
// (the attempt counter feeds the digest) so caches replay retries
// faithfully. `check` returns an error reason, or empty on success.
template <typename Check>
std::vector<std::string> query_with_retries(ChatClient& client, const LlmOptions& options,
                                            const std::string& user, const Check& check,
                                            const std::string& what) {
    if (options.max_retries < 1) throw Error("retry budget must be at least 1");
    std::string last_reason;
    for (int attempt = 0; attempt < options.max_retries; ++attempt) {
        ChatRequest request{options.model, options.temperature, options.system_message, user,
                            attempt};
        const std::string reply = client.complete(request);
        try {
            std::vector<std::string> symbols = parse_answer(reply);
            last_reason = check(symbols);
            if (last_reason.empty()) return symbols;
        } catch (const AnswerParseError& e) {
            last_reason = e.what();
        }
    }
    throw RetriesExhaustedError(what + ": no valid reply in " +
                                std::to_string(options.max_retries) + " attempts (last: " +
                                last_reason + ")");
}

}  // namespace

PromptTemplate PromptTemplate::tf_extraction_default() {
    return {std::string(kTfExtractionText), PromptKind::tf_extraction};
}

PromptTemplate PromptTemplate::regulator_selection_default() {
    return {std::string(kRegulatorSelectionText), PromptKind::regulator_selection};
}

void PromptTemplate::validate() const {
    auto require = [this](std::string_view placeholder) {
        if (text.find(placeholder) == std::string::npos)
            throw Error("prompt template is missing placeholder " + std::string(placeholder));
    };
    require("{CONTEXT}");
    require("{LIST-OF-TFs}");
    if (kind == PromptKind::regulator_selection) require("{GENE-X}");
}

std::string PromptTemplate::render(const Values& values) const {
    validate();
    std::string rendered = text;
    replace_all(rendered, "{CONTEXT}", values.context);
    replace_all(rendered, "{LIST-OF-TFs}", values.tf_list);
    replace_all(rendered, "{GENE-X}", values.gene);
    replace_all(rendered, "{K}", std::to_string(values.k));
    return rendered;
}

std::string render_answer(const std::vector<std::string>& symbols) {
    return "<Answer>[" + join_symbols(symbols) + "]</Answer>";
}

TfPartition extract_tf_partition(const GeneVocabulary& vocab, const std::string& context,
                                 std::size_t window, std::size_t stride, ChatClient& client,
                                 const LlmOptions& options) {
    if (window > vocab.size()) throw Error("window exceeds vocabulary size");
    if (stride < 1 || stride > window) throw Error("stride must be in [1, window]");

    std::set<std::string> tf_set;
    for (std::size_t start : window_starts(vocab.size(), window, stride)) {
        std::vector<std::string> genes(vocab.symbols().begin() + static_cast<std::ptrdiff_t>(start),
                                       vocab.symbols().begin() +
                                           static_cast<std::ptrdiff_t>(start + window));
        PromptTemplate::Values values;
        values.context = context;
        values.tf_list = join_symbols(genes);
        const std::string user = options.tf_extraction.render(values);

        const auto accept_any = [](const std::vector<std::string>&) { return std::string(); };
        std::vector<std::string> proposed =
            query_with_retries(client, options, user, accept_any,
                               "TF extraction window at offset " + std::to_string(start));
        for (const auto& symbol : proposed) {
            if (options.validate_membership) {
                if (std::find(genes.begin(), genes.end(), symbol) == genes.end()) continue;
            } else if (!vocab.contains(symbol)) {
                continue;
            }
            tf_set.insert(symbol);
        }
    }
    if (tf_set.empty()) throw EmptyPartitionError("no proposed TF survived validation");
    return TfPartition::from_tf_list(vocab,
                                     std::vector<std::string>(tf_set.begin(), tf_set.end()));
}

std::vector<std::string> propose_regulators(const std::string& gene,
                                            const std::vector<std::string>& tf_list,
                                            const std::string& context, int k,
                                            ChatClient& client, const LlmOptions& options) {
    if (k < 1) throw Error("regulator count must be positive");
    if (tf_list.size() < static_cast<std::size_t>(k))
        throw TooFewTfsError("candidate TF list is smaller than the requested count");
    if (std::find(tf_list.begin(), tf_list.end(), gene) != tf_list.end())
        throw Error("gene " + gene + " appears in its own candidate TF list");

    PromptTemplate::Values values;
    values.context = context;
    values.gene = gene;
    values.tf_list = join_symbols(tf_list);
    values.k = k;
    const std::string user = options.regulator_selection.render(values);

    const auto check = [&tf_list, k](const std::vector<std::string>& symbols) -> std::string {
        if (symbols.size() != static_cast<std::size_t>(k))
            return "expected " + std::to_string(k) + " symbols, got " +
                   std::to_string(symbols.size());
        for (const auto& symbol : symbols) {
            if (std::find(tf_list.begin(), tf_list.end(), symbol) == tf_list.end())
                return symbol + " is not in the offered TF list";
        }
        return {};
    };
    return query_with_retries(client, options, user, check, "regulators of " + gene);
}

Grn build_llm_grn(const TfPartition& partition, const std::string& context, int k,
                  ChatClient& client, const LlmOptions& options) {
    if (k < 1) throw Error("regulator count must be positive");
    if (partition.tfs().size() < static_cast<std::size_t>(k))
        throw TooFewTfsError("partition offers fewer TFs than regulators per target");

    const auto& targets = partition.targets();
    std::vector<std::vector<std::string>> per_target(targets.size());
    std::vector<std::exception_ptr> errors(targets.size());
    std::atomic<std::size_t> cursor{0};

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= targets.size()) return;
            try {
                per_target[i] =
                    propose_regulators(targets[i], partition.tfs(), context, k, client, options);
            } catch (const RetriesExhaustedError& e) {
                errors[i] = std::make_exception_ptr(
                    RetriesExhaustedError("target " + targets[i] + ": " + e.what()));
            } catch (const ClientError& e) {
                errors[i] = std::make_exception_ptr(
                    ClientError("target " + targets[i] + ": " + e.what()));
            } catch (const std::exception& e) {
                errors[i] =
                    std::make_exception_ptr(Error("target " + targets[i] + ": " + e.what()));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };

    const int n_threads = std::max(1, options.concurrency);
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (const auto& error : errors)
        if (error) std::rethrow_exception(error);

    std::vector<Edge> edges;
    edges.reserve(targets.size() * static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < targets.size(); ++i)
        for (const auto& tf : per_target[i]) edges.emplace_back(tf, targets[i]);
    return validate_grn(partition, edges, k);
}

}  // namespace llm4grn
