#pragma once

#include <stdexcept>
#include <string>

#include "pedtrack/core.hpp"

namespace pedtrack {

enum class PnmErrorKind {
    unreadable,
    malformed_header,
    unsupported_maxval,
    truncated_payload,
    invalid_sample,
    unwritable,
};

class PnmError : public std::runtime_error {
public:
    PnmError(PnmErrorKind kind, const std::string& msg)
        : std::runtime_error(msg), kind_(kind) {}

    PnmErrorKind kind() const { return kind_; }

private:
    PnmErrorKind kind_;
};

// Reads binary or ASCII PGM (P5/P2) and PPM (P6/P3) with maxval <= 255.
// Pixel values are kept exactly as stored.
Frame read_frame(const std::string& path);

// Writes the canonical binary form: P5 for grayscale, P6 for color, maxval
// 255, a single newline after each header token group.
void write_frame(const Frame& frame, const std::string& path);

// Foreground masks (0/1 per pixel) exported as PGM with foreground = 255.
void write_mask(const std::vector<std::uint8_t>& mask, int width, int height,
                const std::string& path);

}   // namespace pedtrack
