/*
 * qsign C API.
 *
 * All functions return a qsign_status. Strings returned through `char**` out
 * parameters are heap-allocated UTF-8 and must be released with
 * qsign_string_free(). After a non-OK status, qsign_last_error() describes
 * the failure for the calling thread.
 */
#ifndef QSIGN_QSIGN_H
#define QSIGN_QSIGN_H

#include <stdint.h>

#if defined(_WIN32)
#  if defined(QSIGN_BUILDING_LIBRARY)
#    define QSIGN_API __declspec(dllexport)
#  else
#    define QSIGN_API __declspec(dllimport)
#  endif
#else
#  define QSIGN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qsign_status {
  QSIGN_OK = 0,
  QSIGN_ERR_INVALID_ARGUMENT = 1,
  QSIGN_ERR_NOT_FOUND = 2,
  QSIGN_ERR_TOO_LARGE = 3,
  QSIGN_ERR_UNAUTHORIZED = 4,
  QSIGN_ERR_PARSE = 5,
  QSIGN_ERR_IO = 6,
  QSIGN_ERR_INTERNAL = 7
} qsign_status;

typedef struct qsign_service qsign_service_t;

QSIGN_API const char* qsign_version(void);
QSIGN_API const char* qsign_status_string(qsign_status status);
/* Message for the last failed call on this thread; never NULL. */
QSIGN_API const char* qsign_last_error(void);
QSIGN_API void qsign_string_free(char* s);

/* --- service --------------------------------------------------------- */

/* `config_json` is an object with optional keys: host, port, data_dir,
 * webhook_secret, secret_header, admin_password, backend (local|remote|fail),
 * remote_url, remote_token, remote_device, timeout_ms, ui_origin, bot_handle,
 * bot_token, bot_api_base, workers, token_ttl_s, login_delay_ms. */
QSIGN_API qsign_status qsign_service_create(const char* config_json, qsign_service_t** out);
/* Serves on a background thread; `bound_port` receives the listening port. */
QSIGN_API qsign_status qsign_service_start(qsign_service_t* service, int* bound_port);
/* Serves on the calling thread until qsign_service_stop() is called. */
QSIGN_API qsign_status qsign_service_run(qsign_service_t* service);
QSIGN_API qsign_status qsign_service_stop(qsign_service_t* service);
/* Blocks until every dispatched badge pipeline has finished. */
QSIGN_API qsign_status qsign_service_wait_idle(qsign_service_t* service);
QSIGN_API void qsign_service_destroy(qsign_service_t* service);

/* --- offline operations ---------------------------------------------- */

/* `request_json`: {username, text, seed, nonce_hex?, timestamp_ms?, backend?,
 * timeout_ms?, include_timing?}. `report_json` receives the badge report;
 * `record_json` (nullable) receives the completed record in the on-disk
 * encoding. */
QSIGN_API qsign_status qsign_badge(const char* request_json, char** report_json, char** record_json);

/* `request_json`: {shots, seed, samples?, username?}. Either out parameter
 * may be NULL. */
QSIGN_API qsign_status qsign_stats(const char* request_json, char** report_json, char** report_text);

/* `record_json` is a stored record document. `matched` receives 1 when the
 * recomputed badge equals the stored one, else 0. */
QSIGN_API qsign_status qsign_verify(const char* record_json, int* matched, char** report_json);

#ifdef __cplusplus
}
#endif

#endif /* QSIGN_QSIGN_H */
