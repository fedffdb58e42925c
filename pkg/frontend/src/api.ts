/** Typed client for the diagnosis service HTTP contract. */

export const CLASS_ORDER = [
  'Bullous',
  'Chickenpox',
  'Eczema',
  'Measles',
  'Mpox',
  'Normal',
  'Urticaria',
  'Vasculitis',
] as const

export type ClassName = (typeof CLASS_ORDER)[number]

export const MAX_UPLOAD_BYTES = 10 * 1024 * 1024

export interface DiagnosisResponse {
  label: string
  probability: number
  per_class: Record<string, number>
  needs_manual_review: boolean
  review_prompt: string | null
  model_version: string
  heatmap_png_base64?: string
}

export interface HealthResponse {
  status: string
  model_version: string
  class_roster: string[]
}

/**
 * retryable marks failures where resubmitting the same file can succeed
 * (network drop, server error) as opposed to payload problems.
 */
export class ApiError extends Error {
  constructor(
    message: string,
    readonly retryable: boolean,
    readonly status?: number,
  ) {
    super(message)
    this.name = 'ApiError'
  }
}

async function errorDetail(response: Response): Promise<string> {
  try {
    const body = await response.json()
    if (body && typeof body.detail === 'string') return body.detail
  } catch {
    /* non-JSON error body */
  }
  return response.statusText || `HTTP ${response.status}`
}

export interface DiagnoseOptions {
  baseUrl: string
  heatmap?: boolean
  fetchImpl?: typeof fetch
}

export async function diagnose(
  file: Blob,
  { baseUrl, heatmap = false, fetchImpl = fetch }: DiagnoseOptions,
): Promise<DiagnosisResponse> {
  if (file.size > MAX_UPLOAD_BYTES) {
    const mib = (file.size / (1024 * 1024)).toFixed(1)
    throw new ApiError(
      `This image is ${mib} MiB; the service accepts at most 10 MiB. Please pick a smaller photo.`,
      false,
    )
  }

  const form = new FormData()
  form.append('image', file, file instanceof File ? file.name : 'capture.png')
  const url = `${baseUrl}/api/v1/diagnose${heatmap ? '?heatmap=1' : ''}`

  let response: Response
  try {
    response = await fetchImpl(url, { method: 'POST', body: form })
  } catch {
    throw new ApiError('Could not reach the diagnosis service. Check your connection and retry.', true)
  }

  if (!response.ok) {
    const detail = await errorDetail(response)
    if (response.status >= 500) {
      throw new ApiError(`The service failed (${response.status}): ${detail}`, true, response.status)
    }
    throw new ApiError(detail, false, response.status)
  }
  return (await response.json()) as DiagnosisResponse
}

export async function health(
  baseUrl: string,
  fetchImpl: typeof fetch = fetch,
): Promise<HealthResponse> {
  let response: Response
  try {
    response = await fetchImpl(`${baseUrl}/api/v1/health`)
  } catch {
    throw new ApiError('Could not reach the diagnosis service.', true)
  }
  if (!response.ok) {
    throw new ApiError(await errorDetail(response), true, response.status)
  }
  return (await response.json()) as HealthResponse
}

/** Gallery page for the predicted class (curated example images). */
export function referenceUrl(baseUrl: string, className: string): string {
  return `${baseUrl}/api/v1/reference/${encodeURIComponent(className)}`
}
