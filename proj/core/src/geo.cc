/*
 * Copyright 2026 The waittime Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "waittime/geo.h"

#include <algorithm>
#include <cmath>

namespace waittime {

bool GeoPoint::IsValid() const {
  return std::isfinite(lat) && std::isfinite(lng) && lat >= -90.0 &&
         lat <= 90.0 && lng >= -180.0 && lng <= 180.0;
}

double HaversineKm(const GeoPoint& a, const GeoPoint& b) {
  const double lat1 = a.lat * kDegToRad;
  const double lat2 = b.lat * kDegToRad;
  const double dlat = lat2 - lat1;
  const double dlng = (b.lng - a.lng) * kDegToRad;
  const double s1 = std::sin(dlat / 2.0);
  const double s2 = std::sin(dlng / 2.0);
  const double h = s1 * s1 + std::cos(lat1) * std::cos(lat2) * s2 * s2;
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

std::array<double, 3> Decompose3d(const GeoPoint& p) {
  const double lat = p.lat * kDegToRad;
  const double lng = p.lng * kDegToRad;
  return {std::cos(lat) * std::cos(lng), std::cos(lat) * std::sin(lng),
          std::sin(lat)};
}

}  // namespace waittime
