#pragma once

#include <cstdint>
#include <cstdio>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace staktau {

// Receives whole flushed batches in insertion order. Returning false rejects
// the batch; the buffer then counts every record of the batch as missed.
class RecordSink {
public:
    virtual ~RecordSink() = default;
    virtual bool write(std::span<const std::string> records) = 0;
};

// Appends records as newline-terminated lines to a stdio stream.
class FileRecordSink : public RecordSink {
public:
    explicit FileRecordSink(const std::string& path);   // truncates
    ~FileRecordSink() override;
    FileRecordSink(const FileRecordSink&) = delete;
    FileRecordSink& operator=(const FileRecordSink&) = delete;

    bool is_open() const { return file_ != nullptr; }
    bool write(std::span<const std::string> records) override;
    std::uint64_t bytes_written() const { return bytes_; }
    void close();

private:
    std::FILE* file_ = nullptr;
    std::uint64_t bytes_ = 0;
};

// Bounded record queue with flush-on-full semantics. Records are never
// dropped for capacity reasons: reaching capacity triggers a synchronous
// flush. Only a rejecting sink produces missed records, and collection
// continues after a warning on the diagnostic channel.
//
// Conservation: pushed() == emitted() + missed() + pending() at all times,
// and pushed() == emitted() + missed() once the final flush() ran.
class FlushBuffer {
public:
    static constexpr std::size_t kDefaultCapacity = 2048;

    explicit FlushBuffer(std::size_t capacity = kDefaultCapacity);

    void push(std::string record, RecordSink& sink);
    void flush(RecordSink& sink);   // force-flush; no-op when empty

    std::size_t capacity() const { return capacity_; }
    std::size_t pending() const { return pending_.size(); }
    std::uint64_t pushed() const { return pushed_; }
    std::uint64_t emitted() const { return emitted_; }
    std::uint64_t missed() const { return missed_; }
    std::uint64_t emitted_bytes() const { return emitted_bytes_; }  // incl. one newline per record
    std::uint64_t flushes() const { return flushes_; }

    // Warning lines about dropped batches go here; defaults to stderr.
    void set_diagnostic(std::function<void(const std::string&)> fn);

private:
    std::size_t capacity_;
    std::vector<std::string> pending_;
    std::uint64_t pushed_ = 0;
    std::uint64_t emitted_ = 0;
    std::uint64_t missed_ = 0;
    std::uint64_t emitted_bytes_ = 0;
    std::uint64_t flushes_ = 0;
    std::function<void(const std::string&)> diagnostic_;
};

} // namespace staktau
