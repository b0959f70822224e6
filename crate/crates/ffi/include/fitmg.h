#ifndef FITMG_H
#define FITMG_H

#include <stddef.h>
#include <stdint.h>

typedef enum FitmgStatus {
  FITMG_STATUS_OK = 0,
  FITMG_STATUS_NULL_POINTER = 1,
  FITMG_STATUS_INVALID_ARGUMENT = 2,
  FITMG_STATUS_UNKNOWN_LEVEL_SET = 3,
  FITMG_STATUS_UNKNOWN_EXAMPLE = 4,
  FITMG_STATUS_MESH_TOO_COARSE = 5,
  FITMG_STATUS_SINGULAR = 6,
  FITMG_STATUS_NO_CONVERGENCE = 7,
  FITMG_STATUS_BUFFER_TOO_SMALL = 8,
  // Any other numerical or geometric failure.
  FITMG_STATUS_NUMERICAL = 9,
  FITMG_STATUS_IO = 10,
  FITMG_STATUS_PANIC = 11,
} FitmgStatus;

typedef enum FitmgSolver {
  FITMG_SOLVER_MULTIGRID = 0,
  FITMG_SOLVER_CONJUGATE_GRADIENT = 1,
  FITMG_SOLVER_DIRECT = 2,
} FitmgSolver;

typedef enum FitmgRegion {
  // `phi > 0`
  FITMG_REGION_REGION1 = 1,
  // `phi < 0`
  FITMG_REGION_REGION2 = 2,
} FitmgRegion;

// Fitted mesh handle.
typedef struct FitmgMesh FitmgMesh;

// Solution handle; keeps the mesh and the problem it solved.
typedef struct FitmgSolution FitmgSolution;

typedef struct FitmgQuality {
  double min_angle;
  double max_angle;
  double worst_rdp_psi;
  size_t triangle_violations;
  size_t quad_violations;
} FitmgQuality;

typedef struct FitmgErrors {
  double l2;
  double h1;
} FitmgErrors;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *fitmg_version(void);

// Message of the last failed call on this thread, or null. Valid until the
// next fitmg call on the same thread.
const char *fitmg_last_error_message(void);

// Fits the `n x n` structured grid of `[-1, 1]^2` to a builtin interface
// (`circle`, `cardioid`, `fivestar-circle`, ...). `radius` is used by
// `circle` only.
//
// # Safety
// `levelset` must be a NUL-terminated string and `out` a valid pointer.
enum FitmgStatus fitmg_mesh_new(const char *levelset,
                                double radius,
                                size_t n,
                                struct FitmgMesh **out);

// Like [`fitmg_mesh_new`] with the level set given as an expression in
// `x` and `y`, e.g. `"x^2 + y^2 - 0.25"`.
//
// # Safety
// `expr` must be a NUL-terminated string and `out` a valid pointer.
enum FitmgStatus fitmg_mesh_new_expr(const char *expr, size_t n, struct FitmgMesh **out);

// # Safety
// `mesh` must come from `fitmg_mesh_new*` and not be used afterwards.
void fitmg_mesh_free(struct FitmgMesh *mesh);

// # Safety
// `mesh` must be a live handle or null (which yields 0).
size_t fitmg_mesh_n_vertices(const struct FitmgMesh *mesh);

// # Safety
// `mesh` must be a live handle or null (which yields 0).
size_t fitmg_mesh_n_elements(const struct FitmgMesh *mesh);

// # Safety
// `mesh` must be a live handle or null (which yields 0).
size_t fitmg_mesh_n_quads(const struct FitmgMesh *mesh);

// # Safety
// `mesh` must be a live handle or null (which yields 0).
size_t fitmg_mesh_n_interface_nodes(const struct FitmgMesh *mesh);

// Copies vertex coordinates as `x0, y0, x1, y1, ...`; `len` must be at
// least twice the vertex count.
//
// # Safety
// `mesh` must be a live handle and `xy` must hold `len` doubles.
enum FitmgStatus fitmg_mesh_vertices(const struct FitmgMesh *mesh, double *xy, size_t len);

// Angle audit with minimum-angle parameter `alpha` (radians).
//
// # Safety
// `mesh` must be a live handle and `out` a valid pointer.
enum FitmgStatus fitmg_mesh_quality(const struct FitmgMesh *mesh,
                                    double alpha,
                                    struct FitmgQuality *out);

// Solves manufactured example `example` (1, 2 or 3) with coefficients
// `beta1` on `phi > 0` and `beta2` on `phi < 0` at mesh size `h = 1/inv_h`.
// The multigrid solver uses an 8 x 8 coarse grid and needs `inv_h` to be
// a power of two of at least 4.
//
// # Safety
// `out` must be a valid pointer.
enum FitmgStatus fitmg_solve_example(uint32_t example,
                                     double beta1,
                                     double beta2,
                                     size_t inv_h,
                                     enum FitmgSolver solver,
                                     struct FitmgSolution **out);

// # Safety
// `sol` must come from `fitmg_solve_example` and not be used afterwards.
void fitmg_solution_free(struct FitmgSolution *sol);

// # Safety
// `sol` must be a live handle or null (which yields 0).
size_t fitmg_solution_n_vertices(const struct FitmgSolution *sol);

// Iterations of the iterative solver, 0 for the direct one.
//
// # Safety
// `sol` must be a live handle or null (which yields 0).
size_t fitmg_solution_iterations(const struct FitmgSolution *sol);

// Nodal values of the solution seen from `region`; they differ only at
// interface nodes, by the prescribed jump.
//
// # Safety
// `sol` must be a live handle and `values` must hold `len` doubles.
enum FitmgStatus fitmg_solution_values(const struct FitmgSolution *sol,
                                       enum FitmgRegion region,
                                       double *values,
                                       size_t len);

// L2 and broken H1 errors against the exact solution.
//
// # Safety
// `sol` must be a live handle and `out` a valid pointer.
enum FitmgStatus fitmg_solution_errors(const struct FitmgSolution *sol, struct FitmgErrors *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FITMG_H */
