#include "nmr/mesh/tensor_ops.hpp"

#include "nmr/autodiff/ops.hpp"

namespace nmr::mesh {

FaceCorners::FaceCorners(const std::vector<Face>& faces) {
  for (auto& v : c) v.resize(faces.size());
  for (std::size_t f = 0; f < faces.size(); ++f)
    for (int k = 0; k < 3; ++k) c[k][f] = faces[f][k];
}

template <typename T>
ad::Tensor<T> face_cross(const ad::Tensor<T>& positions, const FaceCorners& corners) {
  const auto a = ad::gather(positions, corners.c[0]);
  const auto b = ad::gather(positions, corners.c[1]);
  const auto c = ad::gather(positions, corners.c[2]);
  return ad::cross(ad::sub(b, a), ad::sub(c, a));
}

template <typename T>
ad::Tensor<T> face_normals(const ad::Tensor<T>& positions, const FaceCorners& corners) {
  return ad::l2_normalize(face_cross(positions, corners));
}

template <typename T>
ad::Tensor<T> vertex_normals(const ad::Tensor<T>& positions, const FaceCorners& corners) {
  const auto n = face_cross(positions, corners);
  const auto rows = positions.dim(0);
  auto acc = ad::scatter_add(n, corners.c[0], rows);
  acc = ad::add(acc, ad::scatter_add(n, corners.c[1], rows));
  acc = ad::add(acc, ad::scatter_add(n, corners.c[2], rows));
  return ad::l2_normalize(acc);
}

template ad::Tensor<float> face_cross(const ad::Tensor<float>&, const FaceCorners&);
template ad::Tensor<double> face_cross(const ad::Tensor<double>&, const FaceCorners&);
template ad::Tensor<float> face_normals(const ad::Tensor<float>&, const FaceCorners&);
template ad::Tensor<double> face_normals(const ad::Tensor<double>&, const FaceCorners&);
template ad::Tensor<float> vertex_normals(const ad::Tensor<float>&, const FaceCorners&);
template ad::Tensor<double> vertex_normals(const ad::Tensor<double>&, const FaceCorners&);

}  // namespace nmr::mesh
