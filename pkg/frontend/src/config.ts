/** Service base URL resolution, overridable without rebuilding. */

declare global {
  interface Window {
    DERMKIT_API_BASE?: string
  }
}

export const DEFAULT_BASE_URL = 'http://localhost:8000'

/**
 * Priority: ?api=<url> query parameter, then window.DERMKIT_API_BASE
 * (settable from a <script> tag), then the localhost default.
 */
export function resolveBaseUrl(win: Pick<Window, 'location'> & { DERMKIT_API_BASE?: string }): string {
  const fromQuery = new URLSearchParams(win.location.search).get('api')
  const base = fromQuery || win.DERMKIT_API_BASE || DEFAULT_BASE_URL
  return base.replace(/\/+$/, '')
}
