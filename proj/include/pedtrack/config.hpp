#pragma once

#include <string>

#include "pedtrack/background.hpp"
#include "pedtrack/phog.hpp"
#include "pedtrack/tracking.hpp"
#include "pedtrack/windowing.hpp"

namespace pedtrack {

class ConfigError : public ValidationError {
public:
    explicit ConfigError(const std::string& msg) : ValidationError(msg) {}
};

struct TrainingSettings {
    int epochs = 50;
    double learning_rate = 1.0;
    std::uint64_t seed = 1;
    int batch_size = 16;   // 0 = full batch
    std::vector<int> hidden_sizes = {200, 100};
};

struct EvaluationSettings {
    double distance_threshold = 220.0;
    int max_frames = 0;   // 0 = unlimited
};

struct PipelineConfig {
    BackgroundParams background;
    WindowConfig window;
    PhogParams phog;
    std::string model_path;
    double score_threshold = 0.5;
    TrackerConfig tracker;
    TrainingSettings training;
    EvaluationSettings evaluation;

    void validate() const;
};

// Parses `section.key = value` lines with '#' comments. Absent keys keep
// their defaults; unknown keys and out-of-range values are rejected with the
// offending line number or key name.
PipelineConfig load_config(const std::string& path);

PipelineConfig parse_config_text(const std::string& text, const std::string& origin);

}   // namespace pedtrack
