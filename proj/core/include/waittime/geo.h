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

#ifndef WAITTIME_GEO_H_
#define WAITTIME_GEO_H_

#include <array>

namespace waittime {

inline constexpr double kEarthRadiusKm = 6371.0;
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDegToRad = kPi / 180.0;

// A WGS-84 position in decimal degrees.
struct GeoPoint {
  double lat = 0.0;
  double lng = 0.0;

  bool IsValid() const;
  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

// Great-circle distance by the haversine formula.
double HaversineKm(const GeoPoint& a, const GeoPoint& b);

// Unit-sphere Cartesian coordinates:
// (cos lat * cos lng, cos lat * sin lng, sin lat).
std::array<double, 3> Decompose3d(const GeoPoint& p);

}  // namespace waittime

#endif  // WAITTIME_GEO_H_
