#include "pedtrack/netpbm.hpp"

#include <fstream>
#include <string>

namespace pedtrack {

namespace {

// Reads the next header/ASCII token, skipping whitespace and '#' comments.
bool next_token(std::istream& in, std::string& token)
{
    token.clear();
    int ch = in.get();
    while (ch != EOF) {
        if (ch == '#') {
            while (ch != EOF && ch != '\n')
                ch = in.get();
        } else if (std::isspace(ch)) {
            ch = in.get();
        } else {
            break;
        }
    }
    if (ch == EOF)
        return false;
    while (ch != EOF && !std::isspace(ch) && ch != '#') {
        token.push_back(static_cast<char>(ch));
        ch = in.get();
    }
    if (ch == '#')
        in.unget();
    return true;
}

int parse_header_int(std::istream& in, const std::string& path, const char* what)
{
    std::string token;
    if (!next_token(in, token))
        throw PnmError(PnmErrorKind::malformed_header,
                       std::string("missing ") + what + " in netpbm header: " + path);
    std::size_t pos = 0;
    long value = 0;
    try {
        value = std::stol(token, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != token.size() || value < 0)
        throw PnmError(PnmErrorKind::malformed_header,
                       std::string("invalid ") + what + " '" + token +
                           "' in netpbm header: " + path);
    return static_cast<int>(value);
}

}   // namespace

Frame read_frame(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw PnmError(PnmErrorKind::unreadable, "cannot open image file: " + path);

    std::string magic;
    if (!next_token(in, magic))
        throw PnmError(PnmErrorKind::malformed_header, "empty netpbm file: " + path);

    bool binary;
    int channels;
    if (magic == "P5") {
        binary = true;
        channels = 1;
    } else if (magic == "P2") {
        binary = false;
        channels = 1;
    } else if (magic == "P6") {
        binary = true;
        channels = 3;
    } else if (magic == "P3") {
        binary = false;
        channels = 3;
    } else {
        throw PnmError(PnmErrorKind::malformed_header,
                       "unsupported netpbm magic '" + magic + "' in " + path);
    }

    const int width = parse_header_int(in, path, "width");
    const int height = parse_header_int(in, path, "height");
    if (width < 1 || height < 1)
        throw PnmError(PnmErrorKind::malformed_header,
                       "non-positive dimensions in netpbm header: " + path);
    const int maxval = parse_header_int(in, path, "maxval");
    if (maxval < 1 || maxval > 255)
        throw PnmError(PnmErrorKind::unsupported_maxval,
                       "unsupported maxval " + std::to_string(maxval) + " in " + path);

    Frame frame = Frame::create(width, height, channels);
    const std::size_t count = frame.pixels.size();

    if (binary) {
        // Exactly one whitespace byte separates the maxval from the payload;
        // next_token already consumed it.
        in.read(reinterpret_cast<char*>(frame.pixels.data()),
                static_cast<std::streamsize>(count));
        if (static_cast<std::size_t>(in.gcount()) != count)
            throw PnmError(PnmErrorKind::truncated_payload,
                           "truncated pixel payload in " + path);
        for (std::uint8_t v : frame.pixels)
            if (v > maxval)
                throw PnmError(PnmErrorKind::invalid_sample,
                               "sample exceeds maxval in " + path);
    } else {
        std::string token;
        for (std::size_t i = 0; i < count; ++i) {
            if (!next_token(in, token))
                throw PnmError(PnmErrorKind::truncated_payload,
                               "truncated pixel payload in " + path);
            std::size_t pos = 0;
            long value = -1;
            try {
                value = std::stol(token, &pos);
            } catch (const std::exception&) {
                pos = 0;
            }
            if (pos != token.size() || value < 0)
                throw PnmError(PnmErrorKind::invalid_sample,
                               "invalid sample '" + token + "' in " + path);
            if (value > maxval)
                throw PnmError(PnmErrorKind::invalid_sample,
                               "sample exceeds maxval in " + path);
            frame.pixels[i] = static_cast<std::uint8_t>(value);
        }
    }
    return frame;
}

void write_frame(const Frame& frame, const std::string& path)
{
    if (frame.width < 1 || frame.height < 1 ||
        frame.pixels.size() !=
            static_cast<std::size_t>(frame.width) * frame.height * frame.channels)
        throw ValidationError("write_frame: frame shape is inconsistent");
    if (frame.channels != 1 && frame.channels != 3)
        throw ValidationError("write_frame: only 1 or 3 channels supported");

    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw PnmError(PnmErrorKind::unwritable, "cannot write image file: " + path);
    out << (frame.channels == 1 ? "P5" : "P6") << "\n"
        << frame.width << " " << frame.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(frame.pixels.data()),
              static_cast<std::streamsize>(frame.pixels.size()));
    if (!out)
        throw PnmError(PnmErrorKind::unwritable, "write failure on " + path);
}

void write_mask(const std::vector<std::uint8_t>& mask, int width, int height,
                const std::string& path)
{
    if (mask.size() != static_cast<std::size_t>(width) * height)
        throw ValidationError("write_mask: mask size does not match dimensions");
    Frame frame = Frame::create(width, height, 1);
    for (std::size_t i = 0; i < mask.size(); ++i)
        frame.pixels[i] = mask[i] ? 255 : 0;
    write_frame(frame, path);
}

}   // namespace pedtrack
