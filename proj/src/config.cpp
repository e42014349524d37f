#include "pedtrack/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

namespace pedtrack {

namespace {

std::string trim(const std::string& s)
{
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos)
        return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

struct KeyContext {
    std::string key;
    std::string value;
    int line;
    std::string origin;

    [[noreturn]] void fail(const std::string& why) const
    {
        throw ConfigError(origin + ":" + std::to_string(line) + ": key '" + key +
                          "': " + why);
    }

    long long as_int(long long lo, long long hi) const
    {
        long long v = 0;
        const auto* first = value.data();
        const auto* last = value.data() + value.size();
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last)
            fail("expected an integer, got '" + value + "'");
        if (v < lo || v > hi)
            fail("value " + value + " outside [" + std::to_string(lo) + ", " +
                 std::to_string(hi) + "]");
        return v;
    }

    double as_real(double lo, double hi) const
    {
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(value, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != value.size())
            fail("expected a number, got '" + value + "'");
        if (!(v >= lo && v <= hi))
            fail("value " + value + " outside [" + std::to_string(lo) + ", " +
                 std::to_string(hi) + "]");
        return v;
    }
};

using Setter = std::function<void(PipelineConfig&, const KeyContext&)>;

const std::map<std::string, Setter>& key_table()
{
    static const std::map<std::string, Setter> table = {
        {"background.k",
         [](PipelineConfig& c, const KeyContext& k) {
             c.background.k = static_cast<int>(k.as_int(1, 64));
         }},
        {"background.alpha",
         [](PipelineConfig& c, const KeyContext& k) {
             c.background.alpha = k.as_real(1e-9, 1.0 - 1e-9);
         }},
        {"background.t",
         [](PipelineConfig& c, const KeyContext& k) {
             c.background.background_portion = k.as_real(1e-9, 1.0 - 1e-9);
         }},
        {"background.init_variance",
         [](PipelineConfig& c, const KeyContext& k) {
             c.background.init_variance = k.as_real(1e-9, 1e9);
         }},
        {"background.init_weight",
         [](PipelineConfig& c, const KeyContext& k) {
             c.background.init_weight = k.as_real(1e-9, 1.0 - 1e-9);
         }},
        {"background.variance_floor",
         [](PipelineConfig& c, const KeyContext& k) {
             c.background.variance_floor = k.as_real(0.0, 1e9);
         }},
        {"window.width",
         [](PipelineConfig& c, const KeyContext& k) {
             c.window.width = static_cast<int>(k.as_int(1, 1 << 16));
         }},
        {"window.height",
         [](PipelineConfig& c, const KeyContext& k) {
             c.window.height = static_cast<int>(k.as_int(1, 1 << 16));
         }},
        {"window.stride_x",
         [](PipelineConfig& c, const KeyContext& k) {
             c.window.stride_x = static_cast<int>(k.as_int(1, 1 << 16));
         }},
        {"window.stride_y",
         [](PipelineConfig& c, const KeyContext& k) {
             c.window.stride_y = static_cast<int>(k.as_int(1, 1 << 16));
         }},
        {"window.occupancy",
         [](PipelineConfig& c, const KeyContext& k) {
             c.window.occupancy_fraction = k.as_real(1e-9, 1.0);
         }},
        {"phog.bins",
         [](PipelineConfig& c, const KeyContext& k) {
             c.phog.bins = static_cast<int>(k.as_int(2, 360));
         }},
        {"phog.levels",
         [](PipelineConfig& c, const KeyContext& k) {
             c.phog.levels = static_cast<int>(k.as_int(0, 3));
         }},
        {"phog.orientation_range",
         [](PipelineConfig& c, const KeyContext& k) {
             const long long v = k.as_int(0, 360);
             if (v == 360)
                 c.phog.range = OrientationRange::signed_360;
             else if (v == 180)
                 c.phog.range = OrientationRange::unsigned_180;
             else
                 k.fail("orientation range must be 180 or 360");
         }},
        {"classifier.model",
         [](PipelineConfig& c, const KeyContext& k) { c.model_path = k.value; }},
        {"classifier.score_threshold",
         [](PipelineConfig& c, const KeyContext& k) {
             c.score_threshold = k.as_real(0.0, 1.0);
         }},
        {"classifier.epochs",
         [](PipelineConfig& c, const KeyContext& k) {
             c.training.epochs = static_cast<int>(k.as_int(1, 1000000));
         }},
        {"classifier.learning_rate",
         [](PipelineConfig& c, const KeyContext& k) {
             c.training.learning_rate = k.as_real(1e-12, 1e6);
         }},
        {"classifier.seed",
         [](PipelineConfig& c, const KeyContext& k) {
             c.training.seed = static_cast<std::uint64_t>(
                 k.as_int(0, std::numeric_limits<long long>::max()));
         }},
        {"classifier.batch_size",
         [](PipelineConfig& c, const KeyContext& k) {
             c.training.batch_size = static_cast<int>(k.as_int(0, 1 << 20));
         }},
        {"classifier.hidden",
         [](PipelineConfig& c, const KeyContext& k) {
             std::vector<int> sizes;
             std::stringstream ss(k.value);
             std::string item;
             while (std::getline(ss, item, ',')) {
                 const std::string t = trim(item);
                 KeyContext sub{k.key, t, k.line, k.origin};
                 sizes.push_back(static_cast<int>(sub.as_int(1, 1 << 20)));
             }
             if (sizes.empty())
                 k.fail("expected a comma-separated list of layer sizes");
             c.training.hidden_sizes = std::move(sizes);
         }},
        {"tracker.gate",
         [](PipelineConfig& c, const KeyContext& k) {
             c.tracker.gate_threshold = k.as_real(1e-9, 1e9);
         }},
        {"tracker.max_misses",
         [](PipelineConfig& c, const KeyContext& k) {
             c.tracker.max_misses = static_cast<int>(k.as_int(0, 1 << 20));
         }},
        {"tracker.min_hits",
         [](PipelineConfig& c, const KeyContext& k) {
             c.tracker.min_hits_to_confirm = static_cast<int>(k.as_int(1, 1 << 20));
         }},
        {"evaluation.threshold",
         [](PipelineConfig& c, const KeyContext& k) {
             c.evaluation.distance_threshold = k.as_real(1e-9, 1e9);
         }},
        {"evaluation.max_frames",
         [](PipelineConfig& c, const KeyContext& k) {
             c.evaluation.max_frames = static_cast<int>(k.as_int(0, 1 << 30));
         }},
    };
    return table;
}

}   // namespace

void PipelineConfig::validate() const
{
    background.validate();
    window.validate();
    phog.validate();
    tracker.validate();
    if (!(score_threshold >= 0.0 && score_threshold <= 1.0))
        throw ConfigError("classifier.score_threshold must lie in [0, 1]");
    if (training.epochs < 1)
        throw ConfigError("classifier.epochs must be >= 1");
    if (!(training.learning_rate > 0.0))
        throw ConfigError("classifier.learning_rate must be positive");
    if (!(evaluation.distance_threshold > 0.0))
        throw ConfigError("evaluation.threshold must be positive");
    if (evaluation.max_frames < 0)
        throw ConfigError("evaluation.max_frames must be >= 0");
}

PipelineConfig parse_config_text(const std::string& text, const std::string& origin)
{
    PipelineConfig config;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(line_no) +
                              ": expected 'section.key = value', got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || key.find('.') == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(line_no) +
                              ": keys use the form section.key, got '" + key + "'");

        const auto it = key_table().find(key);
        if (it == key_table().end())
            throw ConfigError(origin + ":" + std::to_string(line_no) +
                              ": unknown key '" + key + "'");
        it->second(config, KeyContext{key, value, line_no, origin});
    }
    config.validate();
    return config;
}

PipelineConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str(), path);
}

}   // namespace pedtrack
