#pragma once

#include "ptyblind/priors.hpp"

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace ptyblind {

// PSCR wire protocol, little-endian:
//   request  = "PSCR" + u32 version + f64 t + u32 height + u32 width
//              + 2*height*width f64 (real plane then imaginary plane,
//              row-major)
//   response = 2*height*width f64 (same stacking)
// A server that rejects the header closes the connection before reading
// the payload.
inline constexpr std::uint32_t kPscrVersion = 1;

struct ScoreBackendError : std::runtime_error {
    enum class Kind { Timeout, Protocol, Shape, Io };
    Kind kind;
    ScoreBackendError(Kind k, const std::string& what)
        : std::runtime_error(what), kind(k) {}
};

/// Score model served over a local stream socket. Endpoints:
/// "unix:<path>" (or a bare filesystem path) and "tcp:<host>:<port>".
/// Connections are pooled per thread and re-established on failure.
class RemoteScoreModel : public ScoreModel {
public:
    RemoteScoreModel(std::string endpoint, int height, int width, double timeout_s = 10.0);

    int dimension() const override { return 2 * height_ * width_; }
    void evaluate(std::span<const double> x, double t, std::span<double> out) const override;

    /// Request version override, for exercising protocol mismatches.
    void set_request_version(std::uint32_t v) { version_ = v; }

private:
    std::string endpoint_;
    int height_, width_;
    double timeout_s_;
    std::uint32_t version_ = kPscrVersion;
};

/// Reference PSCR server; evaluates handler(x, t, height, width) per
/// request on an accept loop in a background thread. Intended for tests
/// and for serving analytic scores out of process.
class ScoreServer {
public:
    using Handler =
        std::function<std::vector<double>(const std::vector<double>&, double, int, int)>;

    ScoreServer(std::string endpoint, Handler handler);
    ~ScoreServer();

    ScoreServer(const ScoreServer&) = delete;
    ScoreServer& operator=(const ScoreServer&) = delete;

    const std::string& endpoint() const { return endpoint_; }

private:
    void serve_loop();

    std::string endpoint_;
    Handler handler_;
    int listen_fd_ = -1;
    std::atomic<bool> stop_{false};
    // active per-request connection; shutdown() from the destructor unblocks
    // a serve thread waiting in recv on an idle pooled client connection
    std::mutex client_mutex_;
    int client_fd_ = -1;
    std::thread thread_;
};

}  // namespace ptyblind
