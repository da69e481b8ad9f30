#ifndef AURCASE_H
#define AURCASE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AurcaseStatus {
  AURCASE_STATUS_OK = 0,
  AURCASE_STATUS_NULL_POINTER = 1,
  AURCASE_STATUS_INVALID_UTF8 = 2,
  // The document could not be parsed; its diagnostics are still available.
  AURCASE_STATUS_PARSE_FAILED = 3,
  // A numeric argument is outside its domain.
  AURCASE_STATUS_DOMAIN = 4,
  // The operation needs a document whose references all resolve.
  AURCASE_STATUS_UNRESOLVED = 5,
  // A configuration or ledger text was rejected.
  AURCASE_STATUS_INVALID_INPUT = 6,
  AURCASE_STATUS_INTERNAL = 7,
} AurcaseStatus;

// A parsed document.
typedef struct AurcaseDocument AurcaseDocument;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version, a static string.
const char *aurcase_version(void);

// Message for the last failure on this thread; empty after a success. The
// pointer stays valid until the next call into the library on this thread.
const char *aurcase_last_error_message(void);

// Parse `len` bytes of document text. On `Ok` and on `ParseFailed` a
// document is stored in `*out` and must be freed by the caller.
//
// # Safety
// `text` must point to `len` readable bytes; `file_name` must be null or a
// NUL-terminated string; `out` must be writable.
enum AurcaseStatus aurcase_document_parse(const uint8_t *text,
                                          size_t len,
                                          const char *file_name,
                                          struct AurcaseDocument **out);

// # Safety
// `document` must be null or a handle from [`aurcase_document_parse`] not
// yet freed.
void aurcase_document_free(struct AurcaseDocument *document);

// Diagnostics as JSON (`errors`, `warnings`, `items`). `config` is null or
// rule configuration text.
//
// # Safety
// Pointers as documented on the module.
enum AurcaseStatus aurcase_document_check_json(const struct AurcaseDocument *document,
                                               const char *config_text,
                                               char **out);

// Coverage of the behavioral space as JSON.
//
// # Safety
// Pointers as documented on the module.
enum AurcaseStatus aurcase_document_coverage_json(const struct AurcaseDocument *document,
                                                  char **out);

// Traceability matrix as JSON.
//
// # Safety
// Pointers as documented on the module.
enum AurcaseStatus aurcase_document_trace_json(const struct AurcaseDocument *document, char **out);

// Canonical document text.
//
// # Safety
// Pointers as documented on the module.
enum AurcaseStatus aurcase_document_serialize(const struct AurcaseDocument *document, char **out);

// Readiness decision as JSON for the given ledger text.
//
// # Safety
// Pointers as documented on the module.
enum AurcaseStatus aurcase_document_review_json(const struct AurcaseDocument *document,
                                                const char *ledger_text,
                                                const char *config_text,
                                                char **out);

// Exact one-sided upper confidence bound on an event rate.
//
// # Safety
// `out` must be writable.
enum AurcaseStatus aurcase_rate_upper_bound(uint64_t count,
                                            double exposure,
                                            double confidence,
                                            double *out);

// # Safety
// `s` must be null or a string returned by this library, not yet freed.
void aurcase_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AURCASE_H */
