#ifndef OPLAB_H
#define OPLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes of every fallible call.
 */
typedef enum OplabStatus {
  OPLAB_STATUS_OK = 0,
  OPLAB_STATUS_NULL_ARGUMENT = 1,
  OPLAB_STATUS_INVALID_ARGUMENT = 2,
  OPLAB_STATUS_PARSE_ERROR = 3,
  OPLAB_STATUS_SOLVE_ERROR = 4,
  OPLAB_STATUS_BUFFER_TOO_SMALL = 5,
  OPLAB_STATUS_UTF8_ERROR = 6,
  OPLAB_STATUS_INTERNAL = 7,
} OplabStatus;

/**
 * Nodal values over the interior nodes of a grid.
 */
typedef struct OplabField OplabField;

/**
 * A parsed measure.
 */
typedef struct OplabMeasure OplabMeasure;

/**
 * An assembled operator on a structured grid.
 */
typedef struct OplabOperator OplabOperator;

/**
 * Result of an obstacle solve.
 */
typedef struct OplabSolution OplabSolution;

/**
 * Parses a measure from the plain-text format into a new handle.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum OplabStatus oplab_measure_parse(const char *text, struct OplabMeasure **out);

/**
 * Releases a measure handle; null is accepted.
 *
 * # Safety
 * `m` must come from `oplab_measure_parse` and not be freed twice.
 */
void oplab_measure_free(struct OplabMeasure *m);

/**
 * Total variation of the measure.
 *
 * # Safety
 * `m` and `out` must be valid pointers.
 */
enum OplabStatus oplab_measure_total_variation(const struct OplabMeasure *m, double *out);

/**
 * Potential of the measure at a point (`z` is ignored for planar measures).
 * Atom locations return the signed infinity sentinel.
 *
 * # Safety
 * `m` and `out` must be valid pointers.
 */
enum OplabStatus oplab_potential(const struct OplabMeasure *m,
                                 double x,
                                 double y,
                                 double z,
                                 double *out);

/**
 * Mean of the potential over the ball of radius `r` centered at the point.
 *
 * # Safety
 * `m` and `out` must be valid pointers.
 */
enum OplabStatus oplab_ball_average(const struct OplabMeasure *m,
                                    double x,
                                    double y,
                                    double z,
                                    double r,
                                    double *out);

/**
 * Assembles an operator on the rectangle `[x0, x1] x [y0, y1]` with `nx`
 * by `ny` subdivisions and the named coefficient field (`identity`,
 * `scaled:<c>`, `diag:<a>,<b>`, `nonsym`).
 *
 * # Safety
 * `coeff` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum OplabStatus oplab_operator_new(double x0,
                                    double y0,
                                    double x1,
                                    double y1,
                                    uintptr_t nx,
                                    uintptr_t ny,
                                    const char *coeff,
                                    struct OplabOperator **out);

/**
 * Releases an operator handle; null is accepted.
 *
 * # Safety
 * `op` must come from `oplab_operator_new` and not be freed twice.
 */
void oplab_operator_free(struct OplabOperator *op);

/**
 * Number of interior nodes of the operator's grid.
 *
 * # Safety
 * `op` must be valid or null (null returns zero).
 */
uintptr_t oplab_operator_interior_count(const struct OplabOperator *op);

/**
 * Solves the Dirichlet problem for the measure datum.
 *
 * # Safety
 * All pointers must be valid.
 */
enum OplabStatus oplab_solve_dirichlet(const struct OplabOperator *op,
                                       const struct OplabMeasure *m,
                                       struct OplabField **out);

/**
 * Solves the obstacle problem above the constant obstacle `psi_const`.
 * With `naive = 0` the datum is preprocessed (its capacity-singular
 * negative part moves to the reported reaction); any other value
 * discretizes the datum as-is.
 *
 * # Safety
 * All pointers must be valid.
 */
enum OplabStatus oplab_solve_obstacle(const struct OplabOperator *op,
                                      const struct OplabMeasure *m,
                                      double psi_const,
                                      int32_t naive,
                                      struct OplabSolution **out);

/**
 * Releases a solution handle; null is accepted.
 *
 * # Safety
 * `s` must come from `oplab_solve_obstacle` and not be freed twice.
 */
void oplab_solution_free(struct OplabSolution *s);

/**
 * Copies the solution field into a new handle.
 *
 * # Safety
 * All pointers must be valid.
 */
enum OplabStatus oplab_solution_u(const struct OplabSolution *s, struct OplabField **out);

/**
 * Copies the regular reaction (nodal masses) into a new field handle.
 *
 * # Safety
 * All pointers must be valid.
 */
enum OplabStatus oplab_solution_reaction(const struct OplabSolution *s, struct OplabField **out);

/**
 * Iteration count of the solve (zero for a null handle).
 *
 * # Safety
 * `s` must be valid or null.
 */
uintptr_t oplab_solution_iterations(const struct OplabSolution *s);

/**
 * Complementarity residual of the solve.
 *
 * # Safety
 * All pointers must be valid.
 */
enum OplabStatus oplab_solution_comp_residual(const struct OplabSolution *s, double *out);

/**
 * Number of atoms in the singular reaction.
 *
 * # Safety
 * `s` must be valid or null.
 */
uintptr_t oplab_solution_singular_atom_count(const struct OplabSolution *s);

/**
 * Copies the singular-reaction atoms as `(x, y, z, mass)` quadruples.
 * `cap` counts quadruples; the number written goes to `written`.
 *
 * # Safety
 * `buf` must point to at least `4 * cap` doubles.
 */
enum OplabStatus oplab_solution_singular_atoms(const struct OplabSolution *s,
                                               double *buf,
                                               uintptr_t cap,
                                               uintptr_t *written);

/**
 * Number of interior values in the field (zero for a null handle).
 *
 * # Safety
 * `f` must be valid or null.
 */
uintptr_t oplab_field_len(const struct OplabField *f);

/**
 * Copies the field values into `buf` (capacity `len` doubles).
 *
 * # Safety
 * `buf` must point to at least `len` doubles.
 */
enum OplabStatus oplab_field_copy(const struct OplabField *f, double *buf, uintptr_t len);

/**
 * Reads node `i` of the field as position and value.
 *
 * # Safety
 * All pointers must be valid.
 */
enum OplabStatus oplab_field_node(const struct OplabField *f,
                                  uintptr_t i,
                                  double *x,
                                  double *y,
                                  double *value);

/**
 * Releases a field handle; null is accepted.
 *
 * # Safety
 * `f` must come from this library and not be freed twice.
 */
void oplab_field_free(struct OplabField *f);

/**
 * Static description of a status code.
 */
const char *oplab_status_message(enum OplabStatus status);

#endif /* OPLAB_H */
