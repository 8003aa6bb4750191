// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "ltrr/config.hpp"

namespace ltrr::pipeline {

// Artifact file names inside the run's output directory.
constexpr const char* kManifestFile = "manifest.json";
constexpr const char* kSplitsFile = "splits.jsonl";
constexpr const char* kLabelsFile = "labels.jsonl";
constexpr const char* kFeaturesFile = "features.jsonl";
constexpr const char* kFeatureMetaFile = "feature_meta.json";
constexpr const char* kModelFile = "model.json";
constexpr const char* kDecisionsFile = "decisions.jsonl";
constexpr const char* kEvalFile = "eval.json";
constexpr const char* kReportTextFile = "report.txt";
constexpr const char* kReportTsvFile = "report.tsv";

/// Validates and reports ingestion counts; writes the run manifest.
void run_ingest(const RunConfig& cfg);
/// Builds the retrieval indexes and prints their sizes (sanity stage).
void run_index(const RunConfig& cfg);
void run_split(const RunConfig& cfg);
void run_label(const RunConfig& cfg);
void run_features(const RunConfig& cfg);
void run_train(const RunConfig& cfg);
void run_route(const RunConfig& cfg);
void run_eval(const RunConfig& cfg);
void run_report(const RunConfig& cfg);
/// Full sequence: ingest, split, label, features, train, route, eval, report.
void run_all(const RunConfig& cfg);

}  // namespace ltrr::pipeline
