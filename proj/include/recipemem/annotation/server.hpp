#pragma once

#include <memory>
#include <string>

#include "recipemem/annotation/service.hpp"

namespace recipemem::annotation {

// HTTP front of an AnnotationService:
//   GET  /api/pending?annotator=ID  200 pending item | 204 queue empty | 404 unknown annotator
//   POST /api/record                200 stored | 409 conflict (body carries the existing record) | 400 invalid
//   GET  /api/export?study=ID       200 JSON Lines | 404 other study
//   GET  /api/progress?annotator=ID 200 counts
// Anything else is served from `static_dir` when one is given.
class AnnotationServer {
 public:
  AnnotationServer(AnnotationService& service, std::string static_dir = {});
  ~AnnotationServer();
  AnnotationServer(const AnnotationServer&) = delete;
  AnnotationServer& operator=(const AnnotationServer&) = delete;

  // Port 0 picks a free port; returns the bound port.
  int bind(const std::string& host, int port);
  void listen();  // blocks until stop()
  void start();   // listen on a background thread
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace recipemem::annotation
