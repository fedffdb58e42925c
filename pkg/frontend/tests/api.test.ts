import { describe, expect, it, vi } from 'vitest'

import { ApiError, MAX_UPLOAD_BYTES, diagnose, health, referenceUrl } from '../src/api.js'
import { resolveBaseUrl, DEFAULT_BASE_URL } from '../src/config.js'
import { fetchReturning, jsonResponse, pngFile, stubDiagnosis } from './stubs.js'

const BASE = 'http://svc.test'

describe('diagnose', () => {
  it('posts the file as multipart field "image" and returns the payload', async () => {
    const fetchImpl = vi.fn(async (url: RequestInfo | URL, init?: RequestInit) => {
      expect(String(url)).toBe(`${BASE}/api/v1/diagnose`)
      const body = init?.body as FormData
      expect(body.get('image')).toBeInstanceOf(File)
      return jsonResponse(stubDiagnosis())
    })
    const result = await diagnose(pngFile(), { baseUrl: BASE, fetchImpl })
    expect(result.label).toBe('Mpox')
    expect(result.probability).toBeCloseTo(0.95)
    expect(fetchImpl).toHaveBeenCalledTimes(1)
  })

  it('adds heatmap=1 when the overlay is requested', async () => {
    const fetchImpl = vi.fn(async (url: RequestInfo | URL) => {
      expect(String(url)).toBe(`${BASE}/api/v1/diagnose?heatmap=1`)
      return jsonResponse(stubDiagnosis({ heatmap_png_base64: 'aGk=' }))
    })
    const result = await diagnose(pngFile(), { baseUrl: BASE, heatmap: true, fetchImpl })
    expect(result.heatmap_png_base64).toBe('aGk=')
  })

  it('rejects oversized files before any network call', async () => {
    const fetchImpl = vi.fn()
    const big = pngFile(MAX_UPLOAD_BYTES + 1)
    await expect(diagnose(big, { baseUrl: BASE, fetchImpl })).rejects.toMatchObject({
      name: 'ApiError',
      retryable: false,
    })
    expect(fetchImpl).not.toHaveBeenCalled()
  })

  it('maps network failure to a retryable error', async () => {
    const fetchImpl = fetchReturning(new TypeError('fetch failed'))
    await expect(diagnose(pngFile(), { baseUrl: BASE, fetchImpl })).rejects.toMatchObject({
      retryable: true,
    })
  })

  it('surfaces the server detail for a 400 rejection, non-retryable', async () => {
    const fetchImpl = fetchReturning(
      jsonResponse({ detail: 'could not decode image payload' }, 400),
    )
    const error = await diagnose(pngFile(), { baseUrl: BASE, fetchImpl }).catch((e) => e)
    expect(error).toBeInstanceOf(ApiError)
    expect(error.message).toContain('could not decode')
    expect(error.retryable).toBe(false)
    expect(error.status).toBe(400)
  })

  it('marks 5xx responses retryable', async () => {
    const fetchImpl = fetchReturning(jsonResponse({ detail: 'boom' }, 503))
    const error = await diagnose(pngFile(), { baseUrl: BASE, fetchImpl }).catch((e) => e)
    expect(error.retryable).toBe(true)
    expect(error.status).toBe(503)
  })
})

describe('health', () => {
  it('returns the roster payload', async () => {
    const fetchImpl = fetchReturning(
      jsonResponse({ status: 'ready', model_version: 'v1', class_roster: ['Bullous'] }),
    )
    const payload = await health(BASE, fetchImpl)
    expect(payload.status).toBe('ready')
  })
})

describe('url helpers', () => {
  it('builds gallery links per class', () => {
    expect(referenceUrl(BASE, 'Mpox')).toBe(`${BASE}/api/v1/reference/Mpox`)
  })

  it('resolves the base url from query, global, then default', () => {
    const loc = (search: string) => ({ search }) as Location
    expect(resolveBaseUrl({ location: loc('?api=http://q.test/') })).toBe('http://q.test')
    expect(
      resolveBaseUrl({ location: loc(''), DERMKIT_API_BASE: 'http://g.test' }),
    ).toBe('http://g.test')
    expect(resolveBaseUrl({ location: loc('') })).toBe(DEFAULT_BASE_URL)
  })
})
