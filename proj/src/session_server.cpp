// Copyright 2026 The coplan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "coplan/session_server.hpp"

#include <chrono>
#include <csignal>
#include <cstdio>
#include <deque>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "coplan/error.hpp"

namespace coplan {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;
using nlohmann::json;

namespace {

// Wall-clock scheduler on the server's io_context.
class AsioScheduler final : public Scheduler {
 public:
  explicit AsioScheduler(net::io_context& io) : io_(io), epoch_(std::chrono::steady_clock::now()) {}

  Tick now() const override {
    return std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - epoch_)
        .count();
  }

  TimerId call_after(Tick delay, std::function<void()> fn) override {
    auto timer = std::make_shared<net::steady_timer>(io_, std::chrono::microseconds(std::max<Tick>(delay, 0)));
    TimerId id;
    {
      std::lock_guard lock(mu_);
      if (shut_down_) return 0;
      id = next_id_++;
      timers_.emplace(id, timer);
    }
    timer->async_wait([this, id, fn = std::move(fn)](const beast::error_code& ec) {
      if (ec) return;
      {
        std::lock_guard lock(mu_);
        // Cancelled after the wait had already completed.
        if (timers_.erase(id) == 0) return;
      }
      fn();
    });
    return id;
  }

  void cancel(TimerId id) override {
    std::lock_guard lock(mu_);
    auto it = timers_.find(id);
    if (it == timers_.end()) return;
    it->second->cancel();
    timers_.erase(it);
  }

  void shutdown() {
    std::lock_guard lock(mu_);
    shut_down_ = true;
    for (auto& [_, t] : timers_) t->cancel();
    timers_.clear();
  }

 private:
  net::io_context& io_;
  std::chrono::steady_clock::time_point epoch_;
  std::mutex mu_;
  bool shut_down_ = false;
  TimerId next_id_ = 1;
  std::map<TimerId, std::shared_ptr<net::steady_timer>> timers_;
};

http::status status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ModelNotFound:
    case ErrorCode::UnknownSession:
      return http::status::not_found;
    case ErrorCode::ModelInvalid:
      return http::status::unprocessable_entity;
    case ErrorCode::SessionClosed:
      return http::status::gone;
    case ErrorCode::IoError:
      return http::status::internal_server_error;
    default:
      return http::status::bad_request;
  }
}

std::string error_body(std::string_view code, std::string_view message) {
  return json{{"error", {{"code", code}, {"message", message}}}}.dump();
}

// "/session/abc/ws?x=1" -> {"session", "abc", "ws"}
std::vector<std::string> split_target(beast::string_view target) {
  std::string path(target.substr(0, target.find('?')));
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= path.size()) {
    const auto slash = path.find('/', start);
    const auto end = slash == std::string::npos ? path.size() : slash;
    if (end > start) parts.push_back(path.substr(start, end - start));
    if (slash == std::string::npos) break;
    start = slash + 1;
  }
  return parts;
}

class WsConnection : public std::enable_shared_from_this<WsConnection> {
 public:
  WsConnection(tcp::socket socket, std::shared_ptr<Session> session)
      : ws_(std::move(socket)), session_(std::move(session)) {}

  void run(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.read_message_max(1 << 16);
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) { self->on_accept(ec); });
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    std::weak_ptr<WsConnection> weak = weak_from_this();
    auto executor = ws_.get_executor();
    try {
      subscriber_ = session_->subscribe([weak, executor](const std::string& frame) {
        net::post(executor, [weak, frame] {
          if (auto self = weak.lock()) self->send(frame);
        });
      });
    } catch (const Error& e) {
      send(Message{"error", session_->id(), 0, {{"code", to_string(e.code())}, {"message", e.what()}}}.dump());
      return;
    }
    do_read();
  }

  void do_read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
  }

  void on_read(beast::error_code ec) {
    if (ec) {
      if (subscriber_) session_->unsubscribe(*subscriber_);
      return;
    }
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    session_->handle_frame(text, *subscriber_);
    do_read();
  }

  void send(std::string frame) {
    queue_.push_back(std::move(frame));
    if (queue_.size() == 1) do_write();
  }

  void do_write() {
    ws_.text(true);
    ws_.async_write(net::buffer(queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return;
      self->queue_.pop_front();
      if (!self->queue_.empty()) self->do_write();
    });
  }

  websocket::stream<beast::tcp_stream> ws_;
  std::shared_ptr<Session> session_;
  std::optional<Session::SubscriberId> subscriber_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
};

class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
 public:
  HttpConnection(tcp::socket socket, SessionRegistry& registry) : stream_(std::move(socket)), registry_(registry) {}

  void run() { do_read(); }

 private:
  void do_read() {
    parser_.emplace();
    parser_->body_limit(1 << 20);
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, *parser_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
  }

  void on_read(beast::error_code ec) {
    if (ec) return;
    auto req = parser_->release();
    if (websocket::is_upgrade(req)) {
      const auto parts = split_target(req.target());
      if (parts.size() == 3 && parts[0] == "session" && parts[2] == "ws") {
        try {
          auto session = registry_.find(parts[1]);
          stream_.expires_never();
          std::make_shared<WsConnection>(stream_.release_socket(), std::move(session))->run(std::move(req));
          return;
        } catch (const Error& e) {
          return reply(req, status_for(e.code()), error_body(to_string(e.code()), e.what()));
        }
      }
      return reply(req, http::status::not_found, error_body("NotFound", "no WebSocket endpoint here"));
    }
    route(req);
  }

  void route(const http::request<http::string_body>& req) {
    const auto parts = split_target(req.target());
    try {
      if (parts.size() == 1 && parts[0] == "healthz") {
        if (req.method() != http::verb::get) return not_allowed(req);
        return reply(req, http::status::ok,
                     json{{"status", "ok"}, {"protocol", kProtocolVersion}, {"sessions", registry_.size()}}.dump());
      }
      if (parts.size() == 1 && parts[0] == "session") {
        if (req.method() != http::verb::post) return not_allowed(req);
        json body;
        try {
          body = req.body().empty() ? json::object() : json::parse(req.body());
        } catch (const json::parse_error& e) {
          return reply(req, http::status::bad_request, error_body("ConfigError", e.what()));
        }
        auto session = registry_.create(body);
        json out = {{"session", session->id()},
                    {"protocol", kProtocolVersion},
                    {"ws", "/session/" + session->id() + "/ws"},
                    {"state", session->snapshot()}};
        return reply(req, http::status::created, out.dump());
      }
      if (parts.size() == 2 && parts[0] == "session") {
        auto session = registry_.find(parts[1]);
        if (req.method() == http::verb::get) return reply(req, http::status::ok, session->snapshot_text());
        if (req.method() == http::verb::delete_) {
          session->close();
          return reply(req, http::status::no_content, "");
        }
        return not_allowed(req);
      }
      return reply(req, http::status::not_found, error_body("NotFound", "no such endpoint"));
    } catch (const Error& e) {
      return reply(req, status_for(e.code()), error_body(to_string(e.code()), e.what()));
    }
  }

  void not_allowed(const http::request<http::string_body>& req) {
    reply(req, http::status::method_not_allowed, error_body("MethodNotAllowed", "method not allowed"));
  }

  void reply(const http::request<http::string_body>& req, http::status status, std::string body) {
    auto res = std::make_shared<http::response<http::string_body>>(status, req.version());
    res->set(http::field::server, "coplan");
    if (!body.empty()) res->set(http::field::content_type, "application/json");
    res->keep_alive(req.keep_alive());
    res->body() = std::move(body);
    res->prepare_payload();
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
      if (ec) return;
      if (!res->keep_alive()) {
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
        return;
      }
      self->do_read();
    });
  }

  beast::tcp_stream stream_;
  SessionRegistry& registry_;
  beast::flat_buffer buffer_;
  std::optional<http::request_parser<http::string_body>> parser_;
};

}  // namespace

struct SessionServer::Impl {
  explicit Impl(ServerOptions o)
      : options(std::move(o)),
        scheduler(std::make_shared<AsioScheduler>(io)),
        registry(options.service, scheduler),
        acceptor(io) {
    const tcp::endpoint ep(net::ip::make_address(options.address), options.port);
    acceptor.open(ep.protocol());
    acceptor.set_option(net::socket_base::reuse_address(true));
    acceptor.bind(ep);
    acceptor.listen(net::socket_base::max_listen_connections);
    do_accept();
  }

  void do_accept() {
    acceptor.async_accept(net::make_strand(io), [this](beast::error_code ec, tcp::socket socket) {
      if (ec == net::error::operation_aborted) return;
      if (!ec) std::make_shared<HttpConnection>(std::move(socket), registry)->run();
      do_accept();
    });
  }

  ServerOptions options;
  net::io_context io{1};
  std::shared_ptr<AsioScheduler> scheduler;
  SessionRegistry registry;
  tcp::acceptor acceptor;
  std::thread thread;
  bool stopped = false;
};

SessionServer::SessionServer(ServerOptions options) {
  try {
    impl_ = std::make_unique<Impl>(std::move(options));
  } catch (const boost::system::system_error& e) {
    throw Error(ErrorCode::IoError, std::string("cannot listen: ") + e.what());
  }
}

SessionServer::~SessionServer() { stop(); }

unsigned short SessionServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void SessionServer::start() {
  impl_->thread = std::thread([this] { run(); });
}

void SessionServer::run(bool stop_on_signal) {
  std::optional<net::signal_set> signals;
  if (stop_on_signal) {
    signals.emplace(impl_->io, SIGINT, SIGTERM);
    signals->async_wait([this](const beast::error_code& ec, int) {
      if (!ec) impl_->io.stop();
    });
  }
  impl_->io.run();
}

void SessionServer::stop() {
  if (!impl_ || impl_->stopped) return;
  impl_->stopped = true;
  impl_->io.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
  // Sessions outliving the loop must not touch its timers.
  impl_->scheduler->shutdown();
}

}  // namespace coplan
