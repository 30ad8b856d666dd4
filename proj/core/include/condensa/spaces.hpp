#pragma once

#include <functional>
#include <map>
#include <vector>

#include "condensa/mesh.hpp"

namespace condensa {

using ScalarField = std::function<double(const Point&)>;
using VectorField = std::function<Point(const Point&)>;

enum class SpaceKind { cell_scalar, cell_vector, facet_scalar, facet_vector };

/// Fully discontinuous polynomial space on cells or facets.
///
/// Dofs are numbered entity-major: dof(e, i) = e * block_size + i. Vector
/// spaces are component-major inside an entity block (c * scalar_size + j).
/// For masked facet spaces the dofs of boundary facets are not free.
struct FunctionSpace {
  SpaceKind kind = SpaceKind::cell_scalar;
  int dim = 2;
  int degree = 0;
  bool masked = false;
  int scalar_size = 0;
  int block_size = 0;
  Index num_entities = 0;
  std::vector<Index> boundary_dofs;  // sorted; facet spaces only

  bool is_facet() const { return kind == SpaceKind::facet_scalar || kind == SpaceKind::facet_vector; }
  bool is_vector() const { return kind == SpaceKind::cell_vector || kind == SpaceKind::facet_vector; }
  int components() const { return is_vector() ? dim : 1; }
  Index ndofs() const { return num_entities * block_size; }
  Index dof(Index entity, int i) const { return entity * block_size + i; }
  /// Number of dofs that are not fixed by the boundary mask.
  Index num_free() const { return masked ? ndofs() - static_cast<Index>(boundary_dofs.size()) : ndofs(); }
};

FunctionSpace build_space(const Mesh& mesh, SpaceKind kind, int degree, bool masked = false);

/// Facet-wise L2 projection of boundary data onto the boundary facets of a facet space.
std::map<Index, double> interpolate_boundary(const Mesh& mesh, const FunctionSpace& space, const ScalarField& g);
std::map<Index, double> interpolate_boundary(const Mesh& mesh, const FunctionSpace& space, const VectorField& g);

/// Which hybrid scheme a layout serves. `hdg_poisson` carries only the
/// pressure pair (p, pbar) and is used for the auxiliary HDG form.
enum class Problem { darcy, stokes, hdg_poisson };

const char* to_string(Problem p);

/// Cell/trace split of the unknowns of a hybrid scheme.
///
/// Cell group: per cell [u (d * n_k) | p (n_{k-1})], cell-major.
/// Trace group: per facet [ubar (d * m_k) | pbar (m_k)] for Stokes, [pbar] otherwise;
/// global trace dof = facet * trace_block + j, and `trace_free` maps it to the
/// free numbering (-1 for Dirichlet dofs).
struct BlockLayout {
  Problem problem = Problem::darcy;
  int dim = 2;
  int k = 2;
  Index num_cells = 0;
  Index num_facets = 0;

  FunctionSpace velocity;  // empty (block_size 0) for hdg_poisson
  FunctionSpace pressure;
  FunctionSpace velocity_trace;  // empty unless Stokes
  FunctionSpace pressure_trace;

  int velocity_block = 0;  // cell dofs of u
  int pressure_block = 0;  // cell dofs of p
  int cell_block = 0;
  int ubar_block = 0;      // per-facet dofs of ubar
  int pbar_block = 0;      // per-facet dofs of pbar
  int trace_block = 0;

  std::vector<Index> trace_free;
  std::vector<Index> free_to_trace;
  std::vector<Index> cell_facets;  // (dim + 1) per cell, as in the mesh

  bool has_velocity() const { return velocity_block > 0; }
  bool has_velocity_trace() const { return ubar_block > 0; }
  Index num_cell_dofs() const { return num_cells * cell_block; }
  Index num_traces() const { return num_facets * trace_block; }
  Index num_free_traces() const { return static_cast<Index>(free_to_trace.size()); }
  Index num_dofs() const { return num_cell_dofs() + num_free_traces(); }
  int local_size() const { return cell_block + (dim + 1) * trace_block; }

  Index cell_dof(Index cell, int i) const { return cell * cell_block + i; }
  Index trace_dof(Index facet, int j) const { return facet * trace_block + j; }
  /// Global trace dof of pbar component j on a facet.
  Index pbar_dof(Index facet, int j) const { return trace_dof(facet, ubar_block + j); }
  Index ubar_dof(Index facet, int comp, int j) const;
  /// Global trace dof of local trace position t of a cell (facet t / trace_block).
  Index local_trace_dof(Index cell, int t) const {
    return trace_dof(cell_facets[cell * (dim + 1) + t / trace_block], t % trace_block);
  }
  /// Free index of a local trace position, or -1 when fixed.
  Index local_trace_free(Index cell, int t) const { return trace_free[local_trace_dof(cell, t)]; }
  int num_local_traces() const { return (dim + 1) * trace_block; }
};

BlockLayout make_layout(const Mesh& mesh, Problem problem, int k);

/// Renumber boundary values of one trace space (e.g. from interpolate_boundary)
/// into global trace dofs of the layout.
std::map<Index, double> to_trace_dofs(const BlockLayout& layout, const FunctionSpace& space,
                                      const std::map<Index, double>& values);

/// Trace vector (global trace numbering) from free values plus Dirichlet data.
Eigen::VectorXd expand_traces(const BlockLayout& layout, const Eigen::VectorXd& free_values,
                              const std::map<Index, double>& dirichlet);
/// Restrict a global trace vector to the free numbering.
Eigen::VectorXd restrict_traces(const BlockLayout& layout, const Eigen::VectorXd& traces);

}  // namespace condensa
