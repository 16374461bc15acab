#include "staktau/flush_buffer.hpp"

#include <stdexcept>

namespace staktau {

FileRecordSink::FileRecordSink(const std::string& path) {
    file_ = std::fopen(path.c_str(), "wb");
}

FileRecordSink::~FileRecordSink() {
    close();
}

void FileRecordSink::close() {
    if (file_) {
        std::fclose(file_);
        file_ = nullptr;
    }
}

bool FileRecordSink::write(std::span<const std::string> records) {
    if (!file_) return false;
    for (const std::string& r : records) {
        if (std::fwrite(r.data(), 1, r.size(), file_) != r.size()) return false;
        if (std::fputc('\n', file_) == EOF) return false;
        bytes_ += r.size() + 1;
    }
    return std::fflush(file_) == 0;
}

FlushBuffer::FlushBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw std::invalid_argument("FlushBuffer: capacity must be >= 1");
    pending_.reserve(capacity_);
    diagnostic_ = [](const std::string& line) {
        std::fputs(line.c_str(), stderr);
        std::fputc('\n', stderr);
    };
}

void FlushBuffer::set_diagnostic(std::function<void(const std::string&)> fn) {
    diagnostic_ = std::move(fn);
}

void FlushBuffer::push(std::string record, RecordSink& sink) {
    pending_.push_back(std::move(record));
    pushed_++;
    if (pending_.size() >= capacity_) flush(sink);
}

void FlushBuffer::flush(RecordSink& sink) {
    if (pending_.empty()) return;
    flushes_++;
    if (sink.write(pending_)) {
        emitted_ += pending_.size();
        for (const std::string& r : pending_) emitted_bytes_ += r.size() + 1;
    } else {
        missed_ += pending_.size();
        if (diagnostic_)
            diagnostic_("staktau: warning: sink rejected a flush, " +
                        std::to_string(pending_.size()) + " records missed (" +
                        std::to_string(missed_) + " total)");
    }
    pending_.clear();
}

} // namespace staktau
