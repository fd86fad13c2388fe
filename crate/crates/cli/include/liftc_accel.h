/* Accelerator entry points targeted by liftc.
 *
 * Sequences are (pointer, length) pairs and matrices are row-major
 * (pointer, rows, cols). Operators returning a sequence write it to
 * `out` and return its length, which never exceeds the length of
 * their longest sequence argument. Operators returning a matrix also
 * store its column count in `out_cols` and return its row count.
 */
#ifndef LIFTC_ACCEL_H
#define LIFTC_ACCEL_H

int liftc_dot_product(const int *a, int a_len, const int *b, int b_len);
int liftc_conv1d(const int *data, int data_len, const int *kernel, int kernel_len, int stride, int *out);
int liftc_elemwise_add(const int *a, int a_len, const int *b, int b_len, int *out);
int liftc_elemwise_mul(const int *a, int a_len, const int *b, int b_len, int *out);
int liftc_scalar_scale(const int *a, int a_len, int c, int *out);
int liftc_matmul(const int *A, int A_rows, int A_cols, const int *B, int B_rows, int B_cols, int *out, int *out_cols);
int liftc_empty_seq(int *out);

#endif
