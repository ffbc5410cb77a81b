#pragma once

#include <filesystem>

#include "skgraph/eval.hpp"

namespace skg {

/// Procedurally generated labeled corpus: each subject is a fixed layout of
/// bright rectangles on a dark ground; instances jitter positions and colors
/// slightly so images share structure within a subject and differ across
/// subjects.
struct SyntheticCorpusOptions {
    int subjects = 10;
    int per_subject = 10;
    int image_size = 96;
    unsigned seed = 42;
};

/// Writes PPM images plus a manifest.tsv under `dir` and returns the loaded
/// corpus. Deterministic for a fixed option set.
LabeledCorpus generate_synthetic_corpus(const SyntheticCorpusOptions& opt,
                                        const std::filesystem::path& dir);

}  // namespace skg
