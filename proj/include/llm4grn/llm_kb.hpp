#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "llm4grn/answer_parser.hpp"
#include "llm4grn/chat_client.hpp"
#include "llm4grn/grn.hpp"

namespace llm4grn {

struct RetriesExhaustedError : ClientError {
    using ClientError::ClientError;
};
struct EmptyPartitionError : Error {
    using Error::Error;
};

enum class PromptKind { tf_extraction, regulator_selection };

// Prompt text with substitution placeholders. {CONTEXT} and {LIST-OF-TFs}
// are required for both kinds; {GENE-X} additionally for regulator
// selection and may appear more than once. {K} is optional and receives
// the requested regulator count.
struct PromptTemplate {
    std::string text;
    PromptKind kind = PromptKind::tf_extraction;

    static PromptTemplate tf_extraction_default();
    static PromptTemplate regulator_selection_default();

    void validate() const;  // throws Error when a required placeholder is absent

    struct Values {
        std::string context;
        std::string gene;
        std::string tf_list;
        int k = 0;
    };
    std::string render(const Values& values) const;
};

// Renders a symbol list in the exact reply grammar parse_answer accepts;
// used to build fixture transcripts.
std::string render_answer(const std::vector<std::string>& symbols);

struct LlmOptions {
    std::string model = "gpt-4";
    double temperature = 0.0;
    std::string system_message;  // zero-shot: empty by default
    PromptTemplate tf_extraction = PromptTemplate::tf_extraction_default();
    PromptTemplate regulator_selection = PromptTemplate::regulator_selection_default();
    int max_retries = 3;  // total attempts per query
    int concurrency = 4;  // worker threads for per-target proposals
    bool validate_membership = true;
};

// Asks the model which genes in each sliding window act as transcription
// factors, unions the surviving proposals, and partitions the vocabulary.
// With validate_membership set, proposals outside the queried window are
// dropped; otherwise any vocabulary member is accepted.
TfPartition extract_tf_partition(const GeneVocabulary& vocab, const std::string& context,
                                 std::size_t window, std::size_t stride, ChatClient& client,
                                 const LlmOptions& options);

// Asks for exactly k regulators of `gene` drawn from `tf_list`, retrying
// malformed or invalid replies up to options.max_retries total attempts.
std::vector<std::string> propose_regulators(const std::string& gene,
                                            const std::vector<std::string>& tf_list,
                                            const std::string& context, int k,
                                            ChatClient& client, const LlmOptions& options);

// Proposes regulators for every target in the partition and assembles a
// validated Grn. Requests run on a small worker pool; results and errors
// are deterministic in target-symbol order.
Grn build_llm_grn(const TfPartition& partition, const std::string& context, int k,
                  ChatClient& client, const LlmOptions& options);

}  // namespace llm4grn
