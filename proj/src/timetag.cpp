// Copyright photoncorr contributors
// SPDX-License-Identifier: Apache-2.0

#include "photoncorr/timetag.hpp"

#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>

#include "photoncorr/errors.hpp"

namespace photoncorr {

namespace {

constexpr char kMagic[4] = {'P', 'T', 'A', 'G'};
constexpr std::uint16_t kVersion = 1;

void put_u16(unsigned char* out, std::uint16_t v) {
    out[0] = static_cast<unsigned char>(v & 0xff);
    out[1] = static_cast<unsigned char>(v >> 8);
}

void put_u64(unsigned char* out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
}

std::uint16_t get_u16(const unsigned char* in) {
    return static_cast<std::uint16_t>(in[0] | (in[1] << 8));
}

std::uint64_t get_u64(const unsigned char* in) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in[i]) << (8 * i);
    return v;
}

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

TimeTagStream read_binary(const std::filesystem::path& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) throw config_error("cannot open " + path.string());

    unsigned char header[24];
    if (std::fread(header, 1, sizeof header, f.get()) != sizeof header)
        throw config_error(path.string() + ": truncated header");
    if (std::memcmp(header, kMagic, 4) != 0)
        throw config_error(path.string() + ": bad magic, not a ptag file");
    if (get_u16(header + 4) != kVersion)
        throw config_error(path.string() + ": unsupported ptag version");

    TimeTagStream s;
    s.channel = get_u16(header + 6);
    const std::uint64_t res = get_u64(header + 8);
    if (res == 0 || res > static_cast<std::uint64_t>(INT64_MAX))
        throw config_error(path.string() + ": invalid resolution_ps");
    s.resolution_ps = static_cast<std::int64_t>(res);
    s.span_ticks = get_u64(header + 16);

    std::fseek(f.get(), 0, SEEK_END);
    const long end = std::ftell(f.get());
    if (end < 24 || (end - 24) % 8 != 0)
        throw config_error(path.string() + ": malformed record section");
    const std::size_t count = static_cast<std::size_t>(end - 24) / 8;
    std::fseek(f.get(), 24, SEEK_SET);

    s.ticks.resize(count);
    if (count > 0) {
        std::vector<unsigned char> buf(count * 8);
        if (std::fread(buf.data(), 1, buf.size(), f.get()) != buf.size())
            throw config_error(path.string() + ": short read");
        for (std::size_t i = 0; i < count; ++i) s.ticks[i] = get_u64(buf.data() + 8 * i);
    }
    s.validate();
    return s;
}

void write_binary(const TimeTagStream& s, const std::filesystem::path& path) {
    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) throw config_error("cannot open " + path.string() + " for writing");

    unsigned char header[24];
    std::memcpy(header, kMagic, 4);
    put_u16(header + 4, kVersion);
    put_u16(header + 6, s.channel);
    put_u64(header + 8, static_cast<std::uint64_t>(s.resolution_ps));
    put_u64(header + 16, s.span_ticks);
    if (std::fwrite(header, 1, sizeof header, f.get()) != sizeof header)
        throw config_error(path.string() + ": write failed");

    std::vector<unsigned char> buf(s.ticks.size() * 8);
    for (std::size_t i = 0; i < s.ticks.size(); ++i) put_u64(buf.data() + 8 * i, s.ticks[i]);
    if (!buf.empty() && std::fwrite(buf.data(), 1, buf.size(), f.get()) != buf.size())
        throw config_error(path.string() + ": write failed");
    if (std::fflush(f.get()) != 0) throw config_error(path.string() + ": flush failed");
}

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
    std::uint64_t value = 0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec == std::errc::result_out_of_range) throw config_error(what + " overflows 64 bits");
    if (ec != std::errc() || ptr != end) throw config_error("cannot parse " + what + ": '" + text + "'");
    return value;
}

TimeTagStream read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open " + path.string());

    TimeTagStream s;
    bool have_resolution = false, have_span = false;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue; // marker/comment line
            std::string key = line.substr(1, eq - 1);
            key.erase(0, key.find_first_not_of(' '));
            key.erase(key.find_last_not_of(' ') + 1);
            const std::string value = line.substr(eq + 1);
            if (key == "resolution_ps") {
                const std::uint64_t res = parse_u64(value, "resolution_ps");
                if (res == 0 || res > static_cast<std::uint64_t>(INT64_MAX))
                    throw config_error(path.string() + ": invalid resolution_ps");
                s.resolution_ps = static_cast<std::int64_t>(res);
                have_resolution = true;
            } else if (key == "span_ticks") {
                s.span_ticks = parse_u64(value, "span_ticks");
                have_span = true;
            } else if (key == "channel") {
                const std::uint64_t ch = parse_u64(value, "channel");
                if (ch > 0xffff) throw config_error(path.string() + ": channel out of range");
                s.channel = static_cast<std::uint16_t>(ch);
            }
            continue;
        }
        s.ticks.push_back(parse_u64(line, "tick"));
    }
    if (!have_resolution || !have_span)
        throw config_error(path.string() + ": missing resolution_ps/span_ticks header");
    s.validate();
    return s;
}

void write_csv(const TimeTagStream& s, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw config_error("cannot open " + path.string() + " for writing");
    out << "# ptag-csv 1\n";
    out << "# resolution_ps=" << s.resolution_ps << '\n';
    out << "# channel=" << s.channel << '\n';
    out << "# span_ticks=" << s.span_ticks << '\n';
    for (const auto t : s.ticks) out << t << '\n';
    out.flush();
    if (!out) throw config_error(path.string() + ": write failed");
}

} // namespace

void TimeTagStream::validate() const {
    if (resolution_ps <= 0) throw config_error("resolution_ps must be positive");
    if (span_ticks == 0) throw config_error("span_ticks must be positive");
    std::uint64_t prev = 0;
    for (std::size_t i = 0; i < ticks.size(); ++i) {
        if (i > 0 && ticks[i] < prev) throw config_error("non-monotone timestamps");
        if (ticks[i] >= span_ticks) throw config_error("tick beyond stream span");
        prev = ticks[i];
    }
}

StreamStats stats(const TimeTagStream& stream) {
    if (stream.span_ticks == 0) throw config_error("stats: span_ticks must be positive");
    StreamStats st;
    st.count = stream.ticks.size();
    st.flux_cps = static_cast<double>(st.count) / stream.span_seconds();
    if (st.count > 0) st.mean_waiting_time_s = 1.0 / st.flux_cps;
    return st;
}

TimeTagStream read_stream(const std::filesystem::path& path, StreamFormat format) {
    return format == StreamFormat::binary ? read_binary(path) : read_csv(path);
}

void write_stream(const TimeTagStream& stream, const std::filesystem::path& path,
                  StreamFormat format) {
    stream.validate();
    if (format == StreamFormat::binary)
        write_binary(stream, path);
    else
        write_csv(stream, path);
}

} // namespace photoncorr
