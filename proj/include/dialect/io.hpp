#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <string>

namespace dialect {

/// Input format error tied to a line of a named source.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& source, std::uint64_t line, const std::string& what)
        : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
    std::uint64_t line() const noexcept { return line_; }

private:
    std::uint64_t line_;
};

/// Reads newline-delimited lines from a plain or gzip file (chosen by the
/// ".gz" suffix). Trailing '\r' is stripped.
class LineReader {
public:
    /// Throws std::runtime_error if the file cannot be opened.
    explicit LineReader(const std::filesystem::path& path);
    ~LineReader();
    LineReader(LineReader&&) noexcept;
    LineReader& operator=(LineReader&&) noexcept;

    bool next(std::string& line);
    std::uint64_t line_number() const noexcept { return line_no_; }
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::filesystem::path path_;
    std::uint64_t line_no_ = 0;
};

/// Writes to "<target>.tmp.<pid>" and renames onto `target` on commit().
/// An uncommitted writer removes its temp file on destruction.
class AtomicFileWriter {
public:
    explicit AtomicFileWriter(std::filesystem::path target);
    ~AtomicFileWriter();
    AtomicFileWriter(const AtomicFileWriter&) = delete;
    AtomicFileWriter& operator=(const AtomicFileWriter&) = delete;

    std::ostream& stream() { return out_; }
    void commit();

private:
    std::filesystem::path target_;
    std::filesystem::path temp_;
    std::ofstream out_;
    bool committed_ = false;
};

/// Writes `contents` atomically.
void write_file_atomic(const std::filesystem::path& target, const std::string& contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace dialect
