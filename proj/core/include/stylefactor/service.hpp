#pragma once

#include <memory>
#include <string>

#include "stylefactor/api.hpp"

namespace stylefactor {

/// Read-only HTTP front end over a StyleService. The service object must
/// outlive the server.
class HttpServer {
 public:
  explicit HttpServer(const StyleService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds and serves on a background thread; port 0 picks a free port.
  /// Returns the bound port. Throws Error(kIo) if binding fails.
  int Start(const std::string& host, int port);
  /// Blocks the calling thread serving requests until Stop().
  void Run(const std::string& host, int port);
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace stylefactor
