#include "ptyblind/score_remote.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <map>

namespace ptyblind {
namespace {

using Kind = ScoreBackendError::Kind;

struct Endpoint {
    bool is_unix;
    std::string path;  // unix
    std::string host;  // tcp
    std::string port;
};

Endpoint parse_endpoint(const std::string& spec) {
    Endpoint ep;
    if (spec.rfind("unix:", 0) == 0) {
        ep.is_unix = true;
        ep.path = spec.substr(5);
    } else if (spec.rfind("tcp:", 0) == 0) {
        std::string rest = spec.substr(4);
        auto colon = rest.rfind(':');
        if (colon == std::string::npos)
            throw ScoreBackendError(Kind::Io, "score endpoint missing port: " + spec);
        ep.is_unix = false;
        ep.host = rest.substr(0, colon);
        ep.port = rest.substr(colon + 1);
    } else if (!spec.empty() && spec[0] == '/') {
        ep.is_unix = true;
        ep.path = spec;
    } else {
        throw ScoreBackendError(Kind::Io, "unrecognized score endpoint: " + spec);
    }
    return ep;
}

void set_timeout(int fd, double seconds) {
    if (seconds <= 0.0) return;
    timeval tv;
    tv.tv_sec = static_cast<long>(seconds);
    tv.tv_usec = static_cast<long>((seconds - tv.tv_sec) * 1e6);
    setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
    setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
}

int connect_endpoint(const Endpoint& ep, double timeout_s) {
    int fd = -1;
    if (ep.is_unix) {
        fd = socket(AF_UNIX, SOCK_STREAM, 0);
        if (fd < 0) throw ScoreBackendError(Kind::Io, "socket() failed");
        sockaddr_un addr{};
        addr.sun_family = AF_UNIX;
        if (ep.path.size() >= sizeof(addr.sun_path))
            throw ScoreBackendError(Kind::Io, "unix socket path too long");
        std::strncpy(addr.sun_path, ep.path.c_str(), sizeof(addr.sun_path) - 1);
        if (connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
            close(fd);
            throw ScoreBackendError(Kind::Io, "cannot connect to " + ep.path);
        }
    } else {
        addrinfo hints{};
        hints.ai_family = AF_UNSPEC;
        hints.ai_socktype = SOCK_STREAM;
        addrinfo* res = nullptr;
        if (getaddrinfo(ep.host.c_str(), ep.port.c_str(), &hints, &res) != 0 || !res)
            throw ScoreBackendError(Kind::Io, "cannot resolve " + ep.host);
        fd = socket(res->ai_family, res->ai_socktype, res->ai_protocol);
        if (fd < 0) {
            freeaddrinfo(res);
            throw ScoreBackendError(Kind::Io, "socket() failed");
        }
        if (connect(fd, res->ai_addr, res->ai_addrlen) != 0) {
            freeaddrinfo(res);
            close(fd);
            throw ScoreBackendError(Kind::Io, "cannot connect to " + ep.host + ":" + ep.port);
        }
        freeaddrinfo(res);
    }
    set_timeout(fd, timeout_s);
    return fd;
}

// Full-buffer I/O; distinguishes timeouts from closed connections.
void write_all(int fd, const void* data, std::size_t n) {
    const char* p = static_cast<const char*>(data);
    while (n > 0) {
        ssize_t w = ::send(fd, p, n, MSG_NOSIGNAL);
        if (w < 0) {
            if (errno == EINTR) continue;
            if (errno == EAGAIN || errno == EWOULDBLOCK)
                throw ScoreBackendError(Kind::Timeout, "score backend send timeout");
            throw ScoreBackendError(Kind::Io, "score backend send failed");
        }
        p += w;
        n -= static_cast<std::size_t>(w);
    }
}

void read_all(int fd, void* data, std::size_t n) {
    char* p = static_cast<char*>(data);
    while (n > 0) {
        ssize_t r = ::recv(fd, p, n, 0);
        if (r < 0) {
            if (errno == EINTR) continue;
            if (errno == EAGAIN || errno == EWOULDBLOCK)
                throw ScoreBackendError(Kind::Timeout, "score backend recv timeout");
            throw ScoreBackendError(Kind::Io, "score backend recv failed");
        }
        if (r == 0)
            throw ScoreBackendError(Kind::Protocol,
                                    "score backend closed the connection mid-reply "
                                    "(protocol or version rejection)");
        p += r;
        n -= static_cast<std::size_t>(r);
    }
}

// One pooled connection per (thread, endpoint).
class ConnectionPool {
public:
    // Returns the socket and whether it was freshly opened; a request that
    // fails on a reused socket may retry once, since the peer could have
    // restarted in between.
    std::pair<int, bool> get(const std::string& spec, double timeout_s) {
        auto it = fds_.find(spec);
        if (it != fds_.end()) return {it->second, false};
        int fd = connect_endpoint(parse_endpoint(spec), timeout_s);
        fds_[spec] = fd;
        return {fd, true};
    }
    void drop(const std::string& spec) {
        auto it = fds_.find(spec);
        if (it != fds_.end()) {
            close(it->second);
            fds_.erase(it);
        }
    }
    ~ConnectionPool() {
        for (auto& [spec, fd] : fds_) close(fd);
    }

private:
    std::map<std::string, int> fds_;
};

ConnectionPool& pool() {
    thread_local ConnectionPool p;
    return p;
}

#pragma pack(push, 1)
struct PscrHeader {
    char magic[4];
    std::uint32_t version;
    double t;
    std::uint32_t height;
    std::uint32_t width;
};
#pragma pack(pop)
static_assert(sizeof(PscrHeader) == 24);

}  // namespace

RemoteScoreModel::RemoteScoreModel(std::string endpoint, int height, int width, double timeout_s)
    : endpoint_(std::move(endpoint)), height_(height), width_(width), timeout_s_(timeout_s) {
    if (height < 1 || width < 1)
        throw ScoreBackendError(Kind::Shape, "remote score: bad field shape");
}

void RemoteScoreModel::evaluate(std::span<const double> x, double t,
                                std::span<double> out) const {
    const std::size_t d = static_cast<std::size_t>(dimension());
    if (x.size() != d || out.size() != d)
        throw ScoreBackendError(Kind::Shape, "remote score: payload shape mismatch");

    PscrHeader header{};
    std::memcpy(header.magic, "PSCR", 4);
    header.version = version_;
    header.t = t;
    header.height = static_cast<std::uint32_t>(height_);
    header.width = static_cast<std::uint32_t>(width_);

    for (;;) {
        auto [fd, fresh] = pool().get(endpoint_, timeout_s_);
        try {
            write_all(fd, &header, sizeof(header));
            write_all(fd, x.data(), d * sizeof(double));
            read_all(fd, out.data(), d * sizeof(double));
            return;
        } catch (const ScoreBackendError& e) {
            pool().drop(endpoint_);
            // a reused socket may simply be stale; resend once on a fresh one
            if (fresh || e.kind == Kind::Timeout) throw;
        }
    }
}

ScoreServer::ScoreServer(std::string endpoint, Handler handler)
    : endpoint_(std::move(endpoint)), handler_(std::move(handler)) {
    Endpoint ep = parse_endpoint(endpoint_);
    if (ep.is_unix) {
        unlink(ep.path.c_str());
        listen_fd_ = socket(AF_UNIX, SOCK_STREAM, 0);
        if (listen_fd_ < 0) throw ScoreBackendError(Kind::Io, "server socket() failed");
        sockaddr_un addr{};
        addr.sun_family = AF_UNIX;
        std::strncpy(addr.sun_path, ep.path.c_str(), sizeof(addr.sun_path) - 1);
        if (bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
            listen(listen_fd_, 8) != 0) {
            close(listen_fd_);
            throw ScoreBackendError(Kind::Io, "server cannot bind " + ep.path);
        }
    } else {
        addrinfo hints{};
        hints.ai_family = AF_INET;
        hints.ai_socktype = SOCK_STREAM;
        hints.ai_flags = AI_PASSIVE;
        addrinfo* res = nullptr;
        if (getaddrinfo(ep.host.empty() ? nullptr : ep.host.c_str(), ep.port.c_str(), &hints,
                        &res) != 0 ||
            !res)
            throw ScoreBackendError(Kind::Io, "server cannot resolve " + ep.host);
        listen_fd_ = socket(res->ai_family, res->ai_socktype, res->ai_protocol);
        int yes = 1;
        setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
        if (listen_fd_ < 0 || bind(listen_fd_, res->ai_addr, res->ai_addrlen) != 0 ||
            listen(listen_fd_, 8) != 0) {
            freeaddrinfo(res);
            if (listen_fd_ >= 0) close(listen_fd_);
            throw ScoreBackendError(Kind::Io, "server cannot bind " + endpoint_);
        }
        freeaddrinfo(res);
    }
    thread_ = std::thread([this] { serve_loop(); });
}

ScoreServer::~ScoreServer() {
    stop_.store(true);
    shutdown(listen_fd_, SHUT_RDWR);
    close(listen_fd_);
    {
        std::lock_guard<std::mutex> lock(client_mutex_);
        if (client_fd_ >= 0) shutdown(client_fd_, SHUT_RDWR);
    }
    if (thread_.joinable()) thread_.join();
    Endpoint ep = parse_endpoint(endpoint_);
    if (ep.is_unix) unlink(ep.path.c_str());
}

void ScoreServer::serve_loop() {
    while (!stop_.load()) {
        int fd = accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) {
            if (stop_.load()) return;
            if (errno == EINTR) continue;
            return;
        }
        {
            std::lock_guard<std::mutex> lock(client_mutex_);
            client_fd_ = fd;
        }
        try {
            for (;;) {
                PscrHeader header;
                read_all(fd, &header, sizeof(header));
                if (std::memcmp(header.magic, "PSCR", 4) != 0 ||
                    header.version != kPscrVersion)
                    break;  // reject: close before touching the payload
                std::size_t d = 2ull * header.height * header.width;
                if (d == 0 || d > (1ull << 28)) break;
                std::vector<double> x(d);
                read_all(fd, x.data(), d * sizeof(double));
                std::vector<double> s = handler_(x, header.t, static_cast<int>(header.height),
                                                 static_cast<int>(header.width));
                if (s.size() != d) break;
                write_all(fd, s.data(), d * sizeof(double));
            }
        } catch (const ScoreBackendError&) {
            // client went away or misbehaved; fall through to the next accept
        }
        {
            std::lock_guard<std::mutex> lock(client_mutex_);
            client_fd_ = -1;
        }
        close(fd);
    }
}

}  // namespace ptyblind
