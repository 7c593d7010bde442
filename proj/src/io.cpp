#include "dialect/io.hpp"

#include <zlib.h>
#include <unistd.h>

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace dialect {

struct LineReader::Impl {
    std::ifstream plain;
    gzFile gz = nullptr;
    std::string buffer;

    ~Impl() {
        if (gz) gzclose(gz);
    }

    bool getline(std::string& line) {
        if (!gz) return static_cast<bool>(std::getline(plain, line));
        line.clear();
        char chunk[1 << 14];
        bool any = false;
        while (gzgets(gz, chunk, sizeof(chunk)) != nullptr) {
            any = true;
            line.append(chunk);
            if (!line.empty() && line.back() == '\n') {
                line.pop_back();
                return true;
            }
        }
        int err = 0;
        const char* msg = gzerror(gz, &err);
        if (err != Z_OK && err != Z_STREAM_END) {
            throw std::runtime_error(std::string("gzip read error: ") + msg);
        }
        return any;
    }
};

LineReader::LineReader(const std::filesystem::path& path)
    : impl_(std::make_unique<Impl>()), path_(path) {
    if (path.extension() == ".gz") {
        impl_->gz = gzopen(path.c_str(), "rb");
        if (!impl_->gz) throw std::runtime_error("cannot open " + path.string());
        gzbuffer(impl_->gz, 1 << 17);
    } else {
        impl_->plain.open(path, std::ios::binary);
        if (!impl_->plain) throw std::runtime_error("cannot open " + path.string());
    }
}

LineReader::~LineReader() = default;
LineReader::LineReader(LineReader&&) noexcept = default;
LineReader& LineReader::operator=(LineReader&&) noexcept = default;

bool LineReader::next(std::string& line) {
    if (!impl_->getline(line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++line_no_;
    return true;
}

AtomicFileWriter::AtomicFileWriter(std::filesystem::path target)
    : target_(std::move(target)),
      temp_(target_.string() + ".tmp." + std::to_string(::getpid())),
      out_(temp_, std::ios::binary | std::ios::trunc) {
    if (!out_) throw std::runtime_error("cannot write " + temp_.string());
}

AtomicFileWriter::~AtomicFileWriter() {
    if (!committed_) {
        out_.close();
        std::error_code ec;
        std::filesystem::remove(temp_, ec);
    }
}

void AtomicFileWriter::commit() {
    out_.flush();
    if (!out_) throw std::runtime_error("write failed: " + temp_.string());
    out_.close();
    std::filesystem::rename(temp_, target_);
    committed_ = true;
}

void write_file_atomic(const std::filesystem::path& target, const std::string& contents) {
    AtomicFileWriter w(target);
    w.stream() << contents;
    w.commit();
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace dialect
