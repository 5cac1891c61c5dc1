/*
 * Copyright 2026 The Bytelite Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "bytelite/http.h"

#include <utility>

namespace bytelite {

std::string HttpResponse::Header(const std::string& name) const {
  auto it = headers.find(name);
  return it == headers.end() ? std::string() : it->second;
}

HostLimiter::Slot::Slot(HostLimiter* owner, std::string host)
    : owner_(owner), host_(std::move(host)) {
  std::unique_lock<std::mutex> lock(owner_->mu_);
  owner_->cv_.wait(lock, [&] { return owner_->active_[host_] < owner_->per_host_; });
  ++owner_->active_[host_];
}

HostLimiter::Slot::~Slot() {
  {
    std::lock_guard<std::mutex> lock(owner_->mu_);
    if (--owner_->active_[host_] == 0) owner_->active_.erase(host_);
  }
  owner_->cv_.notify_all();
}

int HostLimiter::InFlight(const std::string& host) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = active_.find(host);
  return it == active_.end() ? 0 : it->second;
}

}  // namespace bytelite
