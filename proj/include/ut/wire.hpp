#pragma once

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cstdint>
#include <cstring>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include <json.hpp>

#include "ut/errors.hpp"
#include "ut/json_io.hpp"
#include "ut/session.hpp"
#include "ut/simulate.hpp"
#include "ut/trace.hpp"

// Newline-delimited JSON over TCP. Every frame is a single-key object:
//   client: {"hello":{"schema":1,"seed":...}}  {"run":{"controller":..,"scenario":..}}
//           {"reset":{}}
//   server: {"hello":{"schema":1,"plant":"name"}}  {"chunk":{t0,dt,r,u,x,d}}
//           {"done":{"diverged":false}}  {"err":"reason"}
// The server simulates; the client sees only sampled signals, never the model.

namespace ut {
namespace wire {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::size_t kChunkSamples = 1024;

namespace detail {

struct Fd {
    int fd = -1;
    Fd() = default;
    explicit Fd(int f) : fd(f) {}
    Fd(const Fd&) = delete;
    Fd& operator=(const Fd&) = delete;
    Fd(Fd&& o) noexcept : fd(o.fd) { o.fd = -1; }
    Fd& operator=(Fd&& o) noexcept {
        if (this != &o) {
            close_fd();
            fd = o.fd;
            o.fd = -1;
        }
        return *this;
    }
    ~Fd() { close_fd(); }
    void close_fd() {
        if (fd >= 0) ::close(fd);
        fd = -1;
    }
    [[nodiscard]] bool open() const { return fd >= 0; }
};

inline bool send_all(int fd, const std::string& data) {
    std::size_t off = 0;
    while (off < data.size()) {
        const ssize_t n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
        if (n <= 0) {
            if (n < 0 && errno == EINTR) continue;
            return false;
        }
        off += static_cast<std::size_t>(n);
    }
    return true;
}

inline bool send_frame_fd(int fd, const jio::json& j) {
    return send_all(fd, j.dump() + "\n");
}

/// Accumulates stream bytes and yields complete newline-terminated lines.
class LineBuffer {
public:
    void append(const char* data, std::size_t n) { buf_.append(data, n); }

    bool next(std::string& line) {
        const std::size_t pos = buf_.find('\n');
        if (pos == std::string::npos) return false;
        line.assign(buf_, 0, pos);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        buf_.erase(0, pos + 1);
        return true;
    }

private:
    std::string buf_;
};

} // namespace detail

// ---------------------------------------------------------------------------
// Server
// ---------------------------------------------------------------------------

/// Exposes one simulated plant to one client at a time; a second concurrent
/// connection is refused with {"err":"busy"}. Single-threaded poll loop.
class WireServer {
public:
    WireServer(PlantSpec spec, std::string label, std::uint16_t port = 0)
        : spec_(std::move(spec)), label_(std::move(label)) {
        spec_.validate();
        listen_fd_ = detail::Fd(::socket(AF_INET, SOCK_STREAM, 0));
        if (!listen_fd_.open()) throw ProtocolError("socket() failed");
        const int one = 1;
        ::setsockopt(listen_fd_.fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(INADDR_ANY);
        addr.sin_port = htons(port);
        if (::bind(listen_fd_.fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
            throw ProtocolError("bind() failed: " + std::string(std::strerror(errno)));
        if (::listen(listen_fd_.fd, 4) != 0)
            throw ProtocolError("listen() failed");
        sockaddr_in bound{};
        socklen_t len = sizeof bound;
        ::getsockname(listen_fd_.fd, reinterpret_cast<sockaddr*>(&bound), &len);
        port_ = ntohs(bound.sin_port);
    }

    [[nodiscard]] std::uint16_t port() const { return port_; }

    /// Blocks until stop() is called from another thread or a signal handler.
    void run() {
        while (!stop_.load(std::memory_order_relaxed)) {
            pollfd fds[2];
            fds[0] = {listen_fd_.fd, POLLIN, 0};
            nfds_t n = 1;
            if (client_.open()) {
                fds[1] = {client_.fd, POLLIN, 0};
                n = 2;
            }
            const int rc = ::poll(fds, n, 100);
            if (rc < 0) {
                if (errno == EINTR) continue;
                throw ProtocolError("poll() failed");
            }
            if (rc == 0) continue;
            if (fds[0].revents & POLLIN) accept_one();
            if (n == 2 && (fds[1].revents & (POLLIN | POLLHUP | POLLERR)))
                service_client();
        }
    }

    void stop() { stop_.store(true, std::memory_order_relaxed); }

private:
    void accept_one() {
        detail::Fd conn(::accept(listen_fd_.fd, nullptr, nullptr));
        if (!conn.open()) return;
        if (client_.open()) {
            detail::send_frame_fd(conn.fd, jio::json{{"err", "busy"}});
            return; // conn closes on scope exit
        }
        client_ = std::move(conn);
        inbuf_ = detail::LineBuffer{};
        session_.reset();
    }

    void service_client() {
        char buf[65536];
        const ssize_t n = ::recv(client_.fd, buf, sizeof buf, 0);
        if (n <= 0) {
            drop_client();
            return;
        }
        inbuf_.append(buf, static_cast<std::size_t>(n));
        std::string line;
        while (client_.open() && inbuf_.next(line)) {
            if (line.empty()) continue;
            if (!handle_line(line)) drop_client();
        }
    }

    void drop_client() {
        client_.close_fd();
        session_.reset();
    }

    bool reply(const jio::json& j) { return detail::send_frame_fd(client_.fd, j); }

    bool handle_line(const std::string& line) {
        jio::json j = jio::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || j.size() != 1) {
            reply(jio::json{{"err", "bad_frame"}});
            return false;
        }
        if (j.contains("hello")) return handle_hello(j["hello"]);
        if (j.contains("run")) return handle_run(j["run"]);
        if (j.contains("reset")) return handle_reset();
        reply(jio::json{{"err", "bad_frame"}});
        return false;
    }

    bool handle_hello(const jio::json& h) {
        if (!h.is_object() || h.value("schema", -1) != kSchemaVersion) {
            reply(jio::json{{"err", "unsupported_schema"}});
            return false;
        }
        PlantSpec spec = spec_;
        if (h.contains("seed") && !h["seed"].is_null())
            spec.seed = h["seed"].get<std::uint64_t>();
        session_ = std::make_unique<SimulatedSession>(spec);
        return reply(jio::json{
            {"hello", {{"schema", kSchemaVersion}, {"plant", label_}}}});
    }

    bool handle_run(const jio::json& r) {
        if (!session_) {
            reply(jio::json{{"err", "no_hello"}});
            return false;
        }
        Trace tr;
        try {
            const TransferFunction ctrl = jio::tf_from_json(r.at("controller"));
            const ScenarioSpec sc = jio::scenario_from_json(r.at("scenario"));
            tr = session_->run(ctrl, sc);
        } catch (const std::exception& e) {
            reply(jio::json{{"err", e.what()}});
            return false;
        }
        for (std::size_t off = 0; off < tr.size(); off += kChunkSamples) {
            const std::size_t m = std::min(kChunkSamples, tr.size() - off);
            jio::json c;
            c["t0"] = tr.t0 + static_cast<double>(off) * tr.dt;
            c["dt"] = tr.dt;
            c["r"] = std::vector<double>(tr.r.begin() + off, tr.r.begin() + off + m);
            c["u"] = std::vector<double>(tr.u.begin() + off, tr.u.begin() + off + m);
            c["x"] = std::vector<double>(tr.x.begin() + off, tr.x.begin() + off + m);
            c["d"] = std::vector<double>(tr.d.begin() + off, tr.d.begin() + off + m);
            if (!reply(jio::json{{"chunk", c}})) return false;
        }
        return reply(jio::json{{"done", {{"diverged", tr.diverged}}}});
    }

    bool handle_reset() {
        if (!session_) {
            reply(jio::json{{"err", "no_hello"}});
            return false;
        }
        session_->reset();
        return reply(jio::json{{"done", jio::json::object()}});
    }

    PlantSpec spec_;
    std::string label_;
    detail::Fd listen_fd_;
    detail::Fd client_;
    detail::LineBuffer inbuf_;
    std::unique_ptr<SimulatedSession> session_;
    std::uint16_t port_ = 0;
    std::atomic<bool> stop_{false};
};

// ---------------------------------------------------------------------------
// Client
// ---------------------------------------------------------------------------

/// PlantSession backed by a remote server. The tuner cannot tell it from a
/// local session; that is the point.
class WireSession : public PlantSession {
public:
    WireSession(const std::string& host, std::uint16_t port,
                std::optional<std::uint64_t> seed = std::nullopt)
        : seed_(seed) {
        connect_to(host, port);
        hello();
    }

    [[nodiscard]] Trace run(const TransferFunction& controller,
                            const ScenarioSpec& scenario) override {
        scenario.validate();
        jio::json frame{{"run", {{"controller", jio::tf_to_json(controller)},
                                 {"scenario", jio::scenario_to_json(scenario)}}}};
        send(frame);
        Trace tr;
        bool first = true;
        for (;;) {
            const jio::json j = read_frame();
            if (j.contains("chunk")) {
                const jio::json& c = j["chunk"];
                try {
                    if (first) {
                        tr.t0 = c.at("t0").get<double>();
                        tr.dt = c.at("dt").get<double>();
                        first = false;
                    }
                    append(tr.r, c.at("r"));
                    append(tr.u, c.at("u"));
                    append(tr.x, c.at("x"));
                    append(tr.d, c.at("d"));
                } catch (const jio::json::exception& e) {
                    throw ProtocolError(std::string{"bad chunk: "} + e.what());
                }
            } else if (j.contains("done")) {
                tr.diverged = j["done"].is_object() && j["done"].value("diverged", false);
                break;
            } else if (j.contains("err")) {
                throw ProtocolError("server: " + j["err"].get<std::string>());
            } else {
                throw ProtocolError("unexpected frame: " + j.dump());
            }
        }
        if (tr.size() == 0) throw ProtocolError("empty run reply");
        return tr;
    }

    void reset() override {
        send(jio::json{{"reset", jio::json::object()}});
        const jio::json j = read_frame();
        if (j.contains("err"))
            throw ProtocolError("server: " + j["err"].get<std::string>());
        if (!j.contains("done")) throw ProtocolError("unexpected frame: " + j.dump());
    }

    [[nodiscard]] std::string label() const override { return label_; }

private:
    void connect_to(const std::string& host, std::uint16_t port) {
        addrinfo hints{};
        hints.ai_family = AF_UNSPEC;
        hints.ai_socktype = SOCK_STREAM;
        addrinfo* res = nullptr;
        const std::string port_str = std::to_string(port);
        if (::getaddrinfo(host.c_str(), port_str.c_str(), &hints, &res) != 0 || !res)
            throw ProtocolError("cannot resolve host: " + host);
        int last_err = 0;
        for (addrinfo* p = res; p; p = p->ai_next) {
            detail::Fd fd(::socket(p->ai_family, p->ai_socktype, p->ai_protocol));
            if (!fd.open()) continue;
            if (::connect(fd.fd, p->ai_addr, p->ai_addrlen) == 0) {
                fd_ = std::move(fd);
                break;
            }
            last_err = errno;
        }
        ::freeaddrinfo(res);
        if (!fd_.open())
            throw ProtocolError("cannot connect to " + host + ":" + port_str + ": " +
                                std::strerror(last_err));
    }

    void hello() {
        jio::json h{{"schema", kSchemaVersion}};
        if (seed_) h["seed"] = *seed_;
        send(jio::json{{"hello", h}});
        const jio::json j = read_frame();
        if (j.contains("err"))
            throw ProtocolError("server: " + j["err"].get<std::string>());
        if (!j.contains("hello") || j["hello"].value("schema", -1) != kSchemaVersion)
            throw ProtocolError("bad hello reply: " + j.dump());
        label_ = j["hello"].value("plant", std::string{"external"});
    }

    void send(const jio::json& j) {
        if (!detail::send_frame_fd(fd_.fd, j))
            throw ProtocolError("connection lost while sending");
    }

    [[nodiscard]] jio::json read_frame() {
        std::string line;
        while (!lines_.next(line)) {
            char buf[65536];
            const ssize_t n = ::recv(fd_.fd, buf, sizeof buf, 0);
            if (n == 0) throw ProtocolError("connection closed by server");
            if (n < 0) {
                if (errno == EINTR) continue;
                throw ProtocolError("recv failed: " + std::string(std::strerror(errno)));
            }
            lines_.append(buf, static_cast<std::size_t>(n));
        }
        jio::json j = jio::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            throw ProtocolError("malformed frame from server");
        return j;
    }

    static void append(std::vector<double>& dst, const jio::json& arr) {
        for (const auto& v : arr) dst.push_back(v.get<double>());
    }

    detail::Fd fd_;
    detail::LineBuffer lines_;
    std::string label_ = "external";
    std::optional<std::uint64_t> seed_;
};

} // namespace wire
} // namespace ut
